#include "qlab/dataset.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qlab/csv.hpp"

namespace qlab {

Dataset generate(std::size_t n, const PhysicsParams& p, Rng& rng) {
  validate(p);
  Dataset d;
  d.generation_seed = rng.seed();
  d.physics = p;
  d.transitions.reserve(n);

  State s = reset(rng);
  std::size_t episode_len = 0;
  while (d.transitions.size() < n) {
    const Action a = rng.coin() ? Action::Right : Action::Left;
    const StepResult res = step(s, a, p);
    d.transitions.push_back({s, a, res.next_state, res.reward, res.terminal});
    ++episode_len;
    if (res.terminal || episode_len >= kEpisodeCap) {
      s = reset(rng);
      episode_len = 0;
    } else {
      s = res.next_state;
    }
  }
  return d;
}

std::vector<std::size_t> split_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx.begin(), idx.end());
  return idx;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  }
  if (d.size() < 2) throw std::invalid_argument("cannot split a dataset with fewer than 2 transitions");

  const auto idx = split_indices(d.size(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(d.size())));

  Dataset train{{}, d.generation_seed, d.physics};
  Dataset val{{}, d.generation_seed, d.physics};
  train.transitions.reserve(n_train);
  val.transitions.reserve(d.size() - n_train);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (k < n_train ? train : val).transitions.push_back(d.transitions[idx[k]]);
  }
  return {std::move(train), std::move(val)};
}

namespace {

void append_state(std::string& out, const State& s) {
  out += csv::format_double(s.x);
  out += ',';
  out += csv::format_double(s.x_dot);
  out += ',';
  out += csv::format_double(s.theta);
  out += ',';
  out += csv::format_double(s.theta_dot);
}

}  // namespace

std::string to_csv(const Dataset& d) {
  const auto& p = d.physics;
  std::string out;
  out += "# generation_seed=" + std::to_string(d.generation_seed) + "\n";
  out += "# gravity=" + csv::format_double(p.gravity) + " mass_cart=" + csv::format_double(p.mass_cart) +
         " mass_pole=" + csv::format_double(p.mass_pole) + " pole_half_length=" + csv::format_double(p.pole_half_length) +
         " force_mag=" + csv::format_double(p.force_mag) + " tau=" + csv::format_double(p.tau) +
         " x_bound=" + csv::format_double(p.x_bound) + " theta_bound=" + csv::format_double(p.theta_bound) + "\n";
  out += kDatasetHeader;
  out += '\n';
  for (const auto& t : d.transitions) {
    append_state(out, t.s);
    out += ',';
    out += std::to_string(action_index(t.a));
    out += ',';
    append_state(out, t.s_next);
    out += ',';
    out += csv::format_double(t.r);
    out += t.terminal ? ",1\n" : ",0\n";
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text, const std::string& source) {
  const auto doc = csv::parse(text, kDatasetHeader, source);
  Dataset d;
  const auto real_or = [&](const char* key, double fallback) {
    const auto v = csv::comment_value(doc, key);
    return v.empty() ? fallback : csv::parse_double(v);
  };
  const auto seed = csv::comment_value(doc, "generation_seed");
  d.generation_seed = seed.empty() ? 0 : std::stoull(seed);
  const PhysicsParams defaults;
  d.physics.gravity = real_or("gravity", defaults.gravity);
  d.physics.mass_cart = real_or("mass_cart", defaults.mass_cart);
  d.physics.mass_pole = real_or("mass_pole", defaults.mass_pole);
  d.physics.pole_half_length = real_or("pole_half_length", defaults.pole_half_length);
  d.physics.force_mag = real_or("force_mag", defaults.force_mag);
  d.physics.tau = real_or("tau", defaults.tau);
  d.physics.x_bound = real_or("x_bound", defaults.x_bound);
  d.physics.theta_bound = real_or("theta_bound", defaults.theta_bound);

  d.transitions.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    Transition t;
    t.s = {row.real(0), row.real(1), row.real(2), row.real(3)};
    const auto a = row.integer(4);
    if (a != 0 && a != 1) row.fail(4, "action must be 0 or 1");
    t.a = action_from_index(static_cast<int>(a));
    t.s_next = {row.real(5), row.real(6), row.real(7), row.real(8)};
    t.r = row.real(9);
    t.terminal = row.flag(10);
    d.transitions.push_back(t);
  }
  return d;
}

void save(const Dataset& d, const std::filesystem::path& path) { csv::write_file(path, to_csv(d)); }

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_csv(csv::read_file(path), path.string());
}

std::uint64_t content_hash(const Dataset& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_csv(d)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qlab
