#include "qlab/evaluation.hpp"

#include <map>
#include <stdexcept>
#include <vector>

#include "qlab/csv.hpp"
#include "qlab/errors.hpp"
#include "qlab/parallel.hpp"

namespace qlab {

EvalReport evaluate_policy(const Policy& p, const EvalConfig& cfg, const Stepper& env) {
  if (cfg.n_episodes == 0) throw std::invalid_argument("evaluation needs at least one episode");
  if (cfg.max_steps == 0) throw std::invalid_argument("evaluation needs a positive step cap");
  validate(p);

  std::vector<double> returns(cfg.n_episodes, 0.0);
  std::vector<char> reached_cap(cfg.n_episodes, 0);
  parallel_for(cfg.n_episodes, cfg.workers, [&](std::size_t ep) {
    Rng rng(derive_seed(cfg.seed, ep));
    State s = reset(rng);
    double ret = 0.0;
    bool terminated = false;
    for (std::size_t t = 0; t < cfg.max_steps; ++t) {
      const StepResult r = env.step(s, policy_action(p, s, rng));
      ret += r.reward;
      if (r.terminal) {
        terminated = true;
        break;
      }
      s = r.next_state;
    }
    returns[ep] = ret;
    reached_cap[ep] = terminated ? 0 : 1;
  });

  EvalReport report;
  report.n_episodes = cfg.n_episodes;
  report.max_steps = cfg.max_steps;
  double sum = 0.0;
  std::size_t successes = 0;
  for (std::size_t ep = 0; ep < cfg.n_episodes; ++ep) {
    sum += returns[ep];
    successes += static_cast<std::size_t>(reached_cap[ep]);
  }
  report.avg_return = sum / static_cast<double>(cfg.n_episodes);
  report.success_rate = static_cast<double>(successes) / static_cast<double>(cfg.n_episodes);
  report.successful = successes == cfg.n_episodes;
  return report;
}

EvalReport evaluate_policy(const Policy& p, const EvalConfig& cfg, const PhysicsParams& physics) {
  return evaluate_policy(p, cfg, RealDynamics(physics));
}

std::string to_text(const EvalReport& r) {
  std::string out;
  out += "avg_return=" + csv::format_double(r.avg_return) + "\n";
  out += "success_rate=" + csv::format_double(r.success_rate) + "\n";
  out += std::string("successful=") + (r.successful ? "1" : "0") + "\n";
  out += "n_episodes=" + std::to_string(r.n_episodes) + "\n";
  out += "max_steps=" + std::to_string(r.max_steps) + "\n";
  return out;
}

EvalReport report_from_text(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, 1, "expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(source, line_no, 1, "missing key '" + key + "'");
    return it->second;
  };
  EvalReport r;
  try {
    r.avg_return = csv::parse_double(get("avg_return"));
    r.success_rate = csv::parse_double(get("success_rate"));
    r.successful = get("successful") == "1";
    r.n_episodes = std::stoull(get("n_episodes"));
    r.max_steps = std::stoull(get("max_steps"));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, line_no, 1, e.what());
  }
  return r;
}

}  // namespace qlab
