#include "polyalg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>

#include "polyalg/blocks.hpp"
#include "polyalg/pla.hpp"

namespace polyalg {

namespace {

using Json = nlohmann::json;

const std::set<std::string> kMpsTasks = {"verify_algebra", "decompose", "casimir", "hp", "diff_realization",
                                         "tensor_lift", "evolve", "bloch", "compare"};
const std::set<std::string> kPolarizationTasks = {"verify_algebra", "decompose", "pscalar", "evolve"};

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw ValidationError(field + ": " + message);
}

void reject_unknown(const Json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) invalid(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}

const Json& require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected an object");
  return j;
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) invalid(path, "expected an integer");
  return j.get<int>();
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(path, "must be finite");
  return v;
}

Complex as_complex(const Json& j, const std::string& path) {
  if (j.is_number()) return {as_number(j, path), 0.0};
  if (j.is_array() && j.size() == 2) return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
  invalid(path, "expected a number or [re, im]");
}

std::vector<double> as_number_list(const Json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> as_int_list(const Json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::MatrixXcd as_complex_matrix(const Json& j, int n, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) invalid(path, "expected " + std::to_string(n) + " rows");
  Eigen::MatrixXcd m(n, n);
  for (int r = 0; r < n; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != n) invalid(rp, "expected " + std::to_string(n) + " entries");
    for (int c = 0; c < n; ++c) m(r, c) = as_complex(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

std::pair<int, int> as_block(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) invalid(path, "expected [k, two_j]");
  return {as_int(j[0], path + "[0]"), as_int(j[1], path + "[1]")};
}

std::size_t tensor_size(int n, int s) {
  std::size_t r = 1;
  for (int i = 0; i < s; ++i) r *= static_cast<std::size_t>(n);
  return r;
}

void parse_mps_hamiltonian(const Json& h, ScenarioConfig& cfg) {
  const std::string p = "hamiltonian";
  require_object(h, p);
  reject_unknown(h, p, {"omega0", "omega", "g", "g_tensor", "delta", "random"});
  auto& mp = cfg.mps_params;
  if (h.contains("random")) {
    if (!h["random"].is_boolean()) invalid(p + ".random", "expected a boolean");
    cfg.random_hamiltonian = h["random"].get<bool>();
  }
  if (h.contains("omega0")) mp.omega0 = as_number(h["omega0"], p + ".omega0");
  if (h.contains("omega")) mp.omega = as_complex_matrix(h["omega"], cfg.n, p + ".omega");
  if (h.contains("g") && h.contains("g_tensor")) invalid(p + ".g", "give either g or g_tensor, not both");
  if (h.contains("g")) mp.g_tensor = single_coupling_tensor(cfg.n, cfg.s, as_complex(h["g"], p + ".g"));
  if (h.contains("g_tensor")) {
    const auto& t = h["g_tensor"];
    if (!t.is_array() || t.size() != tensor_size(cfg.n, cfg.s)) {
      invalid(p + ".g_tensor", "expected a flat array of n^s = " + std::to_string(tensor_size(cfg.n, cfg.s)) + " entries");
    }
    mp.g_tensor.clear();
    for (std::size_t i = 0; i < t.size(); ++i) mp.g_tensor.push_back(as_complex(t[i], p + ".g_tensor[" + std::to_string(i) + "]"));
  }
  if (h.contains("delta")) mp.delta = as_number_list(h["delta"], p + ".delta");
}

void parse_polarization_hamiltonian(const Json& h, ScenarioConfig& cfg) {
  const std::string p = "hamiltonian";
  require_object(h, p);
  reject_unknown(h, p, {"omega", "omega_ij", "g", "Omega"});
  auto& pp = cfg.pol_params;
  const int n = cfg.n_spatial;
  if (h.contains("omega")) {
    pp.omega = as_number_list(h["omega"], p + ".omega");
    if (static_cast<int>(pp.omega.size()) != n) invalid(p + ".omega", "expected n_spatial entries");
  }
  if (h.contains("omega_ij")) pp.omega_ij = as_complex_matrix(h["omega_ij"], n, p + ".omega_ij");
  if (h.contains("g")) {
    const auto& g = h["g"];
    if (!g.is_array()) invalid(p + ".g", "expected an array of [i, j, value]");
    pp.g = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t e = 0; e < g.size(); ++e) {
      const std::string ep = p + ".g[" + std::to_string(e) + "]";
      if (!g[e].is_array() || g[e].size() != 3) invalid(ep, "expected [i, j, value]");
      const int i = as_int(g[e][0], ep + "[0]"), j = as_int(g[e][1], ep + "[1]");
      if (i < 1 || j <= i || j > n) invalid(ep, "indices must satisfy 1 <= i < j <= n_spatial");
      pp.g(i - 1, j - 1) = as_complex(g[e][2], ep + "[2]");
    }
  }
  if (h.contains("Omega")) {
    const auto o = as_number_list(h["Omega"], p + ".Omega");
    if (o.size() != 3) invalid(p + ".Omega", "expected 3 entries (P1, P2, P0)");
    std::copy(o.begin(), o.end(), pp.Omega.begin());
  }
}

double positive(const Json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v > 0.0)) invalid(path, "must be positive");
  return v;
}

int grid_points(const Json& j, const std::string& path) {
  const int v = as_int(j, path);
  if (v < 5 || v > 1000000) invalid(path, "must lie in [5, 1000000]");
  return v;
}

void validate_tasks(const ScenarioConfig& cfg) {
  const auto& allowed = cfg.model == ModelKind::mps ? kMpsTasks : kPolarizationTasks;
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    const std::string path = "run[" + std::to_string(i) + "]";
    const auto& t = cfg.tasks[i];
    if (!allowed.count(t)) invalid(path, "task '" + t + "' is not available for this model");
    if (cfg.model != ModelKind::mps) continue;
    const bool chain_task = t == "decompose" || t == "casimir" || t == "hp" || t == "diff_realization" ||
                            t == "evolve" || t == "bloch" || t == "compare";
    if (chain_task && cfg.n != 1) invalid(path, "task '" + t + "' requires n = 1");
    if (t == "tensor_lift" && (cfg.n != 2 || cfg.s != 2)) invalid(path, "task 'tensor_lift' requires n = 2, s = 2");
    if ((t == "diff_realization" || t == "bloch") && cfg.s * (cfg.s + 1) > cfg.cutoff) {
      invalid("cutoff", "task '" + t + "' needs a block with 2j >= s+1, i.e. cutoff >= s(s+1)");
    }
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into a 1-based line and column.
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigParseError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                               e.what(),
                           line, col);
  }
  require_object(root, "config");
  reject_unknown(root, "", {"model", "n", "s", "n_spatial", "cutoff", "margin", "max_states", "run", "output_dir", "seed",
                            "hamiltonian", "hp_max_two_j", "evolve", "bloch", "compare", "pscalar"});

  ScenarioConfig cfg;
  if (!root.contains("model") || !root["model"].is_string()) invalid("model", "expected \"mps\" or \"polarization\"");
  const auto model = root["model"].get<std::string>();
  if (model == "mps") {
    cfg.model = ModelKind::mps;
  } else if (model == "polarization") {
    cfg.model = ModelKind::polarization;
  } else {
    invalid("model", "expected \"mps\" or \"polarization\", got \"" + model + "\"");
  }

  if (!root.contains("cutoff")) invalid("cutoff", "required");
  cfg.cutoff = as_int(root["cutoff"], "cutoff");
  if (cfg.cutoff < 1) invalid("cutoff", "must be >= 1");
  if (cfg.model == ModelKind::mps) {
    if (root.contains("n_spatial")) invalid("n_spatial", "only valid for the polarization model");
    if (!root.contains("n")) invalid("n", "required for the mps model");
    if (!root.contains("s")) invalid("s", "required for the mps model");
    cfg.n = as_int(root["n"], "n");
    cfg.s = as_int(root["s"], "s");
    if (cfg.n < 1) invalid("n", "must be >= 1");
    if (cfg.s < 1) invalid("s", "must be >= 1");
    if (cfg.cutoff < cfg.s) invalid("cutoff", "must be >= s");
    cfg.margin = 2 * cfg.s;
  } else {
    if (root.contains("n") || root.contains("s")) invalid(root.contains("n") ? "n" : "s", "only valid for the mps model");
    if (!root.contains("n_spatial")) invalid("n_spatial", "required for the polarization model");
    cfg.n_spatial = as_int(root["n_spatial"], "n_spatial");
    if (cfg.n_spatial < 1) invalid("n_spatial", "must be >= 1");
    cfg.margin = 2;
  }
  if (root.contains("margin")) {
    cfg.margin = as_int(root["margin"], "margin");
    if (cfg.margin < 0) invalid("margin", "must be >= 0");
  }
  if (cfg.margin > cfg.cutoff) invalid("margin", "exceeds the cutoff, leaving no interior states");
  if (root.contains("max_states")) {
    const int m = as_int(root["max_states"], "max_states");
    if (m < 1) invalid("max_states", "must be positive");
    cfg.max_states = static_cast<std::size_t>(m);
  }

  if (!root.contains("run") || !root["run"].is_array() || root["run"].empty()) invalid("run", "expected a non-empty array of task names");
  for (std::size_t i = 0; i < root["run"].size(); ++i) {
    const auto& t = root["run"][i];
    if (!t.is_string()) invalid("run[" + std::to_string(i) + "]", "expected a task name");
    cfg.tasks.push_back(t.get<std::string>());
  }
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) invalid("output_dir", "expected a string");
    cfg.output_dir = root["output_dir"].get<std::string>();
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) invalid("seed", "expected a non-negative integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }

  // Hamiltonian defaults: a single unit coupling (mps); unit mode frequencies
  // and one cluster coupling g_12 = 1/2 (polarization).
  if (cfg.model == ModelKind::mps) {
    cfg.mps_params.omega = Eigen::MatrixXcd::Zero(cfg.n, cfg.n);
    cfg.mps_params.g_tensor = single_coupling_tensor(cfg.n, cfg.s, 1.0);
    if (root.contains("hamiltonian")) parse_mps_hamiltonian(root["hamiltonian"], cfg);
    validate_mps_params({cfg.n, cfg.s}, cfg.mps_params);
  } else {
    cfg.pol_params.omega.assign(static_cast<std::size_t>(cfg.n_spatial), 1.0);
    cfg.pol_params.g = Eigen::MatrixXcd::Zero(cfg.n_spatial, cfg.n_spatial);
    if (cfg.n_spatial >= 2) cfg.pol_params.g(0, 1) = 0.5;
    if (root.contains("hamiltonian")) parse_polarization_hamiltonian(root["hamiltonian"], cfg);
    if (cfg.pol_params.omega_ij.size()) {
      const auto& w = cfg.pol_params.omega_ij;
      if ((w - w.adjoint()).cwiseAbs().maxCoeff() > 1e-14) invalid("hamiltonian.omega_ij", "not hermitian");
    }
  }

  if (root.contains("hp_max_two_j")) {
    cfg.hp_max_two_j = as_int(root["hp_max_two_j"], "hp_max_two_j");
    if (cfg.hp_max_two_j < 0) invalid("hp_max_two_j", "must be >= 0");
  }

  if (root.contains("evolve")) {
    const auto& e = require_object(root["evolve"], "evolve");
    reject_unknown(e, "evolve", {"blocks", "p", "t_norm_max", "points", "ehrenfest_window"});
    if (e.contains("blocks")) {
      if (!e["blocks"].is_array()) invalid("evolve.blocks", "expected an array of [k, two_j]");
      for (std::size_t i = 0; i < e["blocks"].size(); ++i) {
        const std::string bp = "evolve.blocks[" + std::to_string(i) + "]";
        const auto b = as_block(e["blocks"][i], bp);
        if (b.first < 0 || b.first >= cfg.s || b.second < 0) invalid(bp, "need 0 <= k < s and two_j >= 0");
        if (b.first + cfg.s * b.second > cfg.cutoff) invalid(bp, "block does not fit the cutoff");
        cfg.evolve.blocks.push_back(b);
      }
    }
    if (e.contains("p")) {
      cfg.evolve.two_p.clear();
      const auto ps = as_number_list(e["p"], "evolve.p");
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const double two = 2.0 * ps[i];
        if (two < 0 || std::abs(two - std::round(two)) > 1e-12 || std::round(two) > cfg.cutoff) {
          invalid("evolve.p[" + std::to_string(i) + "]", "must be a non-negative half-integer with 2p <= cutoff");
        }
        cfg.evolve.two_p.push_back(static_cast<int>(std::lround(two)));
      }
    }
    if (e.contains("t_norm_max")) cfg.evolve.t_norm_max = positive(e["t_norm_max"], "evolve.t_norm_max");
    if (e.contains("points")) cfg.evolve.points = grid_points(e["points"], "evolve.points");
    if (e.contains("ehrenfest_window")) cfg.evolve.ehrenfest_window = positive(e["ehrenfest_window"], "evolve.ehrenfest_window");
  }
  if (cfg.model == ModelKind::polarization) {
    std::erase_if(cfg.evolve.two_p, [&](int tp) { return tp > cfg.cutoff; });
  }

  if (root.contains("bloch")) {
    const auto& b = require_object(root["bloch"], "bloch");
    reject_unknown(b, "bloch", {"block", "horizon", "points", "init"});
    if (b.contains("block")) {
      const auto blk = as_block(b["block"], "bloch.block");
      if (blk.first < 0 || blk.first >= cfg.s) invalid("bloch.block", "need 0 <= k < s");
      if (blk.second < cfg.s + 1) invalid("bloch.block", "two_j must be >= s+1 to fix the structure polynomial");
      if (blk.first + cfg.s * blk.second > cfg.cutoff) invalid("bloch.block", "block does not fit the cutoff");
      cfg.bloch.block = blk;
    }
    if (b.contains("horizon")) cfg.bloch.horizon = positive(b["horizon"], "bloch.horizon");
    if (b.contains("points")) cfg.bloch.points = grid_points(b["points"], "bloch.points");
    if (b.contains("init")) {
      const auto& in = require_object(b["init"], "bloch.init");
      reject_unknown(in, "bloch.init", {"v0", "v_re", "v_im"});
      BlochState st;
      if (in.contains("v0")) st.v0 = as_number(in["v0"], "bloch.init.v0");
      if (in.contains("v_re")) st.v_re = as_number(in["v_re"], "bloch.init.v_re");
      if (in.contains("v_im")) st.v_im = as_number(in["v_im"], "bloch.init.v_im");
      cfg.bloch.init = st;
    }
  }

  if (root.contains("compare")) {
    const auto& c = require_object(root["compare"], "compare");
    reject_unknown(c, "compare", {"two_j", "horizon", "points"});
    if (c.contains("two_j")) cfg.compare.two_j = as_int_list(c["two_j"], "compare.two_j");
    if (c.contains("horizon")) cfg.compare.horizon = positive(c["horizon"], "compare.horizon");
    if (c.contains("points")) cfg.compare.points = grid_points(c["points"], "compare.points");
  }
  if (std::count(cfg.tasks.begin(), cfg.tasks.end(), "compare")) {
    for (std::size_t i = 0; i < cfg.compare.two_j.size(); ++i) {
      const int tj = cfg.compare.two_j[i];
      const std::string path = "compare.two_j[" + std::to_string(i) + "]";
      if (tj < 0) invalid(path, "must be >= 0");
      if (tj > 0 && tj < cfg.s + 1) invalid(path, "blocks with 0 < 2j < s+1 cannot fix the structure polynomial");
      if (cfg.s * tj > cfg.cutoff) invalid(path, "block (k=0, 2j=" + std::to_string(tj) + ") does not fit the cutoff");
    }
    if (std::abs(cfg.mps_params.g_tensor.empty() ? Complex(0.0) : cfg.mps_params.g_tensor[0]) == 0.0 && !cfg.random_hamiltonian) {
      invalid("hamiltonian.g", "compare needs a nonzero coupling");
    }
  }

  if (root.contains("pscalar")) {
    const auto& p = require_object(root["pscalar"], "pscalar");
    reject_unknown(p, "pscalar", {"clusters", "max_order"});
    if (p.contains("clusters")) {
      const auto& cl = p["clusters"];
      if (!cl.is_array() || cl.empty()) invalid("pscalar.clusters", "expected a non-empty array of [i, j, kappa]");
      cfg.pscalar.clusters.clear();
      for (std::size_t i = 0; i < cl.size(); ++i) {
        const std::string cp = "pscalar.clusters[" + std::to_string(i) + "]";
        if (!cl[i].is_array() || cl[i].size() != 3) invalid(cp, "expected [i, j, kappa]");
        std::array<int, 3> c{as_int(cl[i][0], cp + "[0]"), as_int(cl[i][1], cp + "[1]"), as_int(cl[i][2], cp + "[2]")};
        if (c[0] < 1 || c[1] <= c[0] || c[1] > cfg.n_spatial) invalid(cp, "indices must satisfy 1 <= i < j <= n_spatial");
        if (c[2] < 0) invalid(cp, "kappa must be >= 0");
        cfg.pscalar.clusters.push_back(c);
      }
    }
    if (p.contains("max_order")) {
      cfg.pscalar.max_order = as_int(p["max_order"], "pscalar.max_order");
      if (cfg.pscalar.max_order < 1) invalid("pscalar.max_order", "must be >= 1");
    }
  }
  if (std::count(cfg.tasks.begin(), cfg.tasks.end(), "pscalar")) {
    if (cfg.n_spatial < 2) invalid("n_spatial", "task 'pscalar' requires n_spatial >= 2");
    int photons = 0;
    for (const auto& c : cfg.pscalar.clusters) photons += 2 * c[2];
    if (photons > cfg.cutoff) invalid("pscalar.clusters", "the cluster state needs " + std::to_string(photons) + " photons, above the cutoff");
  }

  validate_tasks(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------

bool ScenarioResult::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const SummaryEntry& e) { return e.check.pass; });
}

nlohmann::ordered_json ScenarioResult::summary_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["task"] = e.task;
    j["check"] = e.check.identity_name;
    j["residual"] = e.check.max_residual;
    j["tolerance"] = e.check.tolerance;
    j["pass"] = e.check.pass;
    arr.push_back(j);
  }
  nlohmann::ordered_json out;
  out["all_pass"] = all_pass();
  out["checks"] = arr;
  return out;
}

namespace {

class ScenarioRunner {
 public:
  ScenarioRunner(const ScenarioConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts) {}

  ScenarioResult run() {
    for (const auto& task : cfg_.tasks) {
      if (opts_.verbose) std::clog << "task " << task << "\n";
      try {
        if (cfg_.model == ModelKind::mps) {
          run_mps(task);
        } else {
          run_polarization(task);
        }
      } catch (const Error& e) {
        Check c;
        c.identity_name = "task_completed: " + std::string(e.what());
        c.max_residual = std::nan("");
        c.pass = false;
        result_.entries.push_back({task, c});
      }
    }
    result_.artifacts.add_json("summary.json", result_.summary_json());
    return std::move(result_);
  }

 private:
  void record(const std::string& task, const Report& report, const std::string& prefix = "") {
    for (const auto& c : report.checks()) {
      Check copy = c;
      if (!prefix.empty()) copy.identity_name = prefix + "/" + c.identity_name;
      result_.entries.push_back({task, copy});
    }
  }

  const PlaGenerators& gen() {
    if (!gen_) gen_ = build_mps_generators({cfg_.n, cfg_.s}, cfg_.cutoff, cfg_.max_states);
    return *gen_;
  }

  const PolarizationOps& pol() {
    if (!pol_) pol_ = build_polarization_ops(cfg_.n_spatial, cfg_.cutoff, cfg_.max_states);
    return *pol_;
  }

  MpsHamiltonianParams random_mps_params() const {
    std::mt19937_64 rng(cfg_.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const int n = cfg_.n, s = cfg_.s;
    MpsHamiltonianParams p;
    p.omega0 = nd(rng);
    p.omega = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      p.omega(i, i) = nd(rng);
      for (int j = i + 1; j < n; ++j) {
        p.omega(i, j) = Complex(nd(rng), nd(rng));
        p.omega(j, i) = std::conj(p.omega(i, j));
      }
    }
    // Draw one value per sorted multi-index and copy it to every permutation.
    std::map<std::vector<int>, Complex> drawn;
    p.g_tensor.assign(tensor_size(n, s), Complex(0.0));
    for (std::size_t pos = 0; pos < p.g_tensor.size(); ++pos) {
      std::vector<int> idx(static_cast<std::size_t>(s));
      std::size_t rest = pos;
      for (int r = s - 1; r >= 0; --r) {
        idx[static_cast<std::size_t>(r)] = static_cast<int>(rest % static_cast<std::size_t>(n));
        rest /= static_cast<std::size_t>(n);
      }
      std::sort(idx.begin(), idx.end());
      auto it = drawn.find(idx);
      if (it == drawn.end()) it = drawn.emplace(idx, Complex(nd(rng), nd(rng))).first;
      p.g_tensor[pos] = it->second;
    }
    p.delta = {nd(rng), nd(rng)};
    return p;
  }

  const MpsHamiltonianParams& mps_params() {
    if (!params_) params_ = cfg_.random_hamiltonian ? random_mps_params() : cfg_.mps_params;
    return *params_;
  }

  std::vector<BlockSubspace> selected_blocks(int min_dim, int max_two_j) {
    std::vector<BlockSubspace> out;
    for (auto& b : decompose_mps(gen(), opts_.verbose).blocks) {
      if (b.dimension >= min_dim && b.label.two_j <= max_two_j) out.push_back(std::move(b));
    }
    return out;
  }

  // -- mps -------------------------------------------------------------------

  void run_mps(const std::string& task) {
    if (task == "verify_algebra") return mps_verify();
    if (task == "decompose") return mps_decompose();
    if (task == "casimir") return mps_casimir();
    if (task == "hp") return mps_hp();
    if (task == "diff_realization") return mps_diff_realization();
    if (task == "tensor_lift") return record(task, u2_tensor_lift(gen(), cfg_.margin));
    if (task == "evolve") return mps_evolve();
    if (task == "bloch") return mps_bloch();
    if (task == "compare") return mps_compare();
  }

  void mps_verify() {
    const auto& g = gen();
    record("verify_algebra", verify_pla_cr(g, cfg_.margin));

    // Hamiltonian symmetries with parameters drawn from the seed.
    Report sym("hamiltonian");
    const auto H = build_mps_hamiltonian(g, random_mps_params());
    const auto P = interior_projector(g.basis, cfg_.margin);
    const double scale = std::max(1.0, H.max_abs() * g.R1.max_abs());
    sym.add("commutes_R1", interior_norm(commutator(H, g.R1), P) / scale, 1e-12);
    bool charge = true;
    for (int c = 0; c < H.matrix().outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(H.matrix(), c); it; ++it) {
        const auto& a = g.basis->state(static_cast<std::size_t>(it.row()));
        const auto& b = g.basis->state(static_cast<std::size_t>(c));
        int na = 0, nb = 0;
        for (int m = 1; m <= cfg_.n; ++m) {
          na += a[m];
          nb += b[m];
        }
        charge = charge && (na - nb) % cfg_.s == 0;
      }
    }
    sym.add_condition("preserves_Cs_charge", charge);
    record("verify_algebra", sym, "hamiltonian");

    if (cfg_.n > 1) {
      try {
        const auto red = reduce_rank_one({cfg_.n, cfg_.s}, mps_params());
        record("verify_algebra", rank_one_conjugation_check(g, mps_params(), red), "rank_one_reduction");
      } catch (const UnsupportedReductionError& e) {
        if (opts_.verbose) std::clog << "note: " << e.what() << "; rank-one reduction skipped\n";
      }
    }
  }

  void mps_decompose() {
    const auto dec = decompose_mps(gen(), true);
    record("decompose", mps_partition_report(gen(), dec));
    nlohmann::ordered_json j;
    j["model"] = "mps";
    j["cutoff"] = cfg_.cutoff;
    j["blocks"] = block_inventory_json(dec.blocks);
    auto clipped = nlohmann::ordered_json::array();
    for (const auto& c : dec.clipped) clipped.push_back({{"k", c.k}, {"two_j", c.two_j}});
    j["clipped"] = clipped;
    result_.artifacts.add_json("blocks.json", j);
  }

  void mps_casimir() {
    // The bivariate family needs s+2 blocks with dimension >= s+2.
    const int s = cfg_.s;
    int fit_cutoff = cfg_.cutoff;
    auto count = [&](int c) {
      int n = 0;
      for (int k = 0; k < s; ++k)
        for (int tj = s + 1; k + s * tj <= c; ++tj) ++n;
      return n;
    };
    while (count(fit_cutoff) < s + 2) ++fit_cutoff;
    const auto fit_gen = build_mps_generators({1, s}, fit_cutoff, cfg_.max_states);
    std::vector<StructurePolynomial> samples;
    auto per_block = nlohmann::ordered_json::array();
    Report blocks("structure_polynomial");
    for (const auto& b : decompose_mps(fit_gen).blocks) {
      if (b.dimension < s + 2) continue;
      auto q = extract_structure_polynomial(fit_gen, b);
      const auto cp = commutator_polynomial_check(fit_gen, b, q);
      for (const auto& c : cp.checks()) blocks.add(b.label.to_string() + " " + c.identity_name, c.max_residual, c.tolerance);
      blocks.add(b.label.to_string() + " reproduction", q.reproduction_residual, 1e-9);
      auto jq = q.to_json();
      jq["k"] = b.label.k;
      jq["two_j"] = b.label.two_j;
      per_block.push_back(jq);
      samples.push_back(std::move(q));
    }
    const auto family = fit_structure_family(samples);
    record("casimir", blocks);
    record("casimir", casimir_check(gen(), family, cfg_.margin));

    nlohmann::ordered_json j;
    j["s"] = s;
    j["fit_cutoff"] = fit_cutoff;
    auto coeffs = nlohmann::ordered_json::array();
    for (const auto& p : family.coefficient_polynomials()) coeffs.push_back(p.coeffs());
    j["family_coefficients_in_r1"] = coeffs;
    j["blocks"] = per_block;
    result_.artifacts.add_json("structure_poly.json", j);
  }

  void mps_hp() {
    for (const auto& b : selected_blocks(2, cfg_.hp_max_two_j)) {
      record("hp", verify_hp(holstein_primakoff(gen(), b)), b.label.to_string());
    }
  }

  void mps_diff_realization() {
    const int max_degree = std::max(10, cfg_.s + 2);
    for (const auto& b : selected_blocks(cfg_.s + 2, cfg_.hp_max_two_j)) {
      const auto q = extract_structure_polynomial(gen(), b);
      record("diff_realization", differential_realization_check(q, q.casimir_value, max_degree), b.label.to_string());
      record("diff_realization", realization_intertwining_check(gen(), b, q), b.label.to_string());
    }
  }

  void mps_evolve() {
    const auto& g = gen();
    const auto H = build_mps_hamiltonian(g, mps_params());
    std::vector<BlockSubspace> blocks;
    if (cfg_.evolve.blocks.empty()) {
      blocks = selected_blocks(2, 10);
    } else {
      for (const auto& [k, tj] : cfg_.evolve.blocks) blocks.push_back(mps_block(g, k, tj));
    }
    for (const auto& b : blocks) {
      const auto Hb = restrict_to_block(H, b);
      const std::vector<NamedMatrix> conserved = {{"R1", restrict_to_block(g.R1, b).matrix}};
      const std::vector<NamedMatrix> ops = {{"V0", restrict_to_block(g.V0, b).matrix},
                                            {"Vplus", restrict_to_block(g.Vplus[0], b).matrix},
                                            {"Vminus", restrict_to_block(g.Vminus[0], b).matrix},
                                            {"R1", conserved[0].matrix}};
      Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(b.dimension);
      psi0(b.reference_index) = 1.0;
      const std::string tag = "k" + std::to_string(b.label.k) + "_2j" + std::to_string(b.label.two_j);
      evolve_and_record(b.label.to_string(), tag, Hb, psi0, conserved, ops);
    }
  }

  void evolve_and_record(const std::string& label, const std::string& tag, const RestrictedOperator& Hb,
                         const Eigen::VectorXcd& psi0, const std::vector<NamedMatrix>& conserved,
                         const std::vector<NamedMatrix>& ops) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hb.matrix, Eigen::EigenvaluesOnly);
    const double hnorm = std::max(1e-12, es.eigenvalues().cwiseAbs().maxCoeff());
    const auto times = uniform_grid(cfg_.evolve.t_norm_max / hnorm, cfg_.evolve.points);
    const auto evo = evolve_block_exact(Hb, psi0, times, conserved);
    Report rep("evolve");
    rep.add("norm_drift", evo.norm_drift, 1e-10);
    rep.add("energy_drift", evo.energy_drift, 1e-10);
    for (const auto& [name, drift] : evo.constants_drift) rep.add(name + "_drift", drift, 1e-10);
    record("evolve", rep, label);

    // Ehrenfest check on a short, finely sampled window.
    const auto fine = uniform_grid(cfg_.evolve.ehrenfest_window / hnorm, cfg_.evolve.points);
    const auto series = heisenberg_expectations(evolve_block_exact(Hb, psi0, fine), ops);
    record("evolve", series.report, label);

    std::vector<CsvColumn> cols{{"time", times}};
    const auto energy = expectation_series(evo, Hb.matrix);
    for (const auto& op : ops) {
      const auto v = expectation_series(evo, op.matrix);
      CsvColumn re{op.name + "_re", {}}, im{op.name + "_im", {}};
      for (const auto& x : v) {
        re.values.push_back(x.real());
        im.values.push_back(x.imag());
      }
      cols.push_back(std::move(re));
      cols.push_back(std::move(im));
    }
    CsvColumn e{"energy", {}}, nrm{"norm", {}};
    for (std::size_t t = 0; t < times.size(); ++t) {
      e.values.push_back(energy[t].real());
      nrm.values.push_back(evo.states[t].norm());
    }
    cols.push_back(std::move(e));
    cols.push_back(std::move(nrm));
    result_.artifacts.add_csv("timeseries_evolve_" + tag + ".csv", cols);
  }

  void mps_bloch() {
    const auto& g = gen();
    const int s = cfg_.s;
    std::pair<int, int> label{0, cfg_.cutoff / s};
    if (cfg_.bloch.block) label = *cfg_.bloch.block;
    const auto b = mps_block(g, label.first, label.second);
    const auto q = extract_structure_polynomial(g, b);
    const auto bp = bloch_params_from({cfg_.n, s}, mps_params());
    BlochState init;
    if (cfg_.bloch.init) {
      init = *cfg_.bloch.init;
    } else {
      Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(b.dimension);
      psi0(b.reference_index) = 1.0;
      init.v0 = psi0.dot(restrict_to_block(g.V0, b).matrix * psi0).real();
      const Complex vp = psi0.dot(restrict_to_block(g.Vplus[0], b).matrix * psi0);
      init.v_re = vp.real();
      init.v_im = vp.imag();
    }
    init.r1 = q.r1;
    const double rate = std::max(1e-12, std::abs(bp.g) * std::pow(std::max(1, label.second), 0.5 * (s - 1)));
    const auto times = uniform_grid(cfg_.bloch.horizon / rate, cfg_.bloch.points);
    const auto traj = mean_field_bloch(q, bp, init, times);
    record("bloch", traj.report);
    record("bloch", second_order_residual(traj, q, bp).report);

    CsvColumn t{"time", traj.times}, v0{"v0", {}}, vr{"vplus_re", {}}, vi{"vplus_im", {}}, en{"energy", {}}, inv{"invariant", {}};
    for (const auto& st : traj.states) {
      v0.values.push_back(st.v0);
      vr.values.push_back(st.v_re);
      vi.values.push_back(st.v_im);
      en.values.push_back(st.energy);
      inv.values.push_back(bloch_invariant(q, st));
    }
    result_.artifacts.add_csv("timeseries_bloch.csv", {t, v0, vr, vi, en, inv});
  }

  void mps_compare() {
    ComparisonOptions co;
    co.horizon = cfg_.compare.horizon;
    co.time_points = cfg_.compare.points;
    co.threads = opts_.threads;
    const auto rows = compare_quantum_classical(gen(), mps_params(), cfg_.compare.two_j, co);
    Report rep("compare");
    // The one-state block (2j = 0) has zero deviation by construction and stays out of the trend.
    std::vector<std::pair<int, double>> trend;
    for (const auto& r : rows)
      if (r.two_j > 0) trend.emplace_back(r.two_j, r.deviation);
    std::sort(trend.begin(), trend.end());
    bool decreasing = true;
    for (std::size_t i = 1; i < trend.size(); ++i) decreasing = decreasing && trend[i].second < trend[i - 1].second;
    if (trend.size() > 1) rep.add_condition("deviation_decreasing_in_2j", decreasing);
    record("compare", rep);
    nlohmann::ordered_json j;
    j["s"] = cfg_.s;
    j["horizon"] = cfg_.compare.horizon;
    j["rows"] = deviation_json(rows);
    j["monotone_decreasing"] = decreasing;
    result_.artifacts.add_json("deviation.json", j);
    for (const auto& r : rows) {
      result_.artifacts.add_csv("timeseries_compare_2j" + std::to_string(r.two_j) + ".csv",
                                {{"time", r.times}, {"v0_quantum", r.quantum_v0}, {"v0_classical", r.classical_v0}});
    }
  }

  // -- polarization ----------------------------------------------------------

  void run_polarization(const std::string& task) {
    if (task == "verify_algebra") return record(task, verify_polarization_ops(pol(), cfg_.margin));
    if (task == "decompose") return pol_decompose();
    if (task == "pscalar") return pol_pscalar();
    if (task == "evolve") return pol_evolve();
  }

  void pol_decompose() {
    const auto& p = pol();
    Report rep("decompose");
    std::vector<BlockSubspace> all;
    for (int shell = 0; shell <= cfg_.cutoff; ++shell) {
      const auto blocks = decompose_polarization(p, shell);
      int dim = 0;
      double ortho = 0.0, leak = 0.0;
      for (const auto& b : blocks) {
        dim += b.dimension;
        ortho = std::max(ortho, orthonormality_defect(b));
        leak = std::max(leak, restrict_to_block(p.P2sq, b).leakage);
        leak = std::max(leak, restrict_to_block(p.Pplus, b).leakage);
        all.push_back(b);
      }
      const std::string pre = "shell_" + std::to_string(shell) + "/";
      rep.add_condition(pre + "blocks_cover_shell", dim == static_cast<int>(p.basis->shell_indices(shell).size()));
      rep.add(pre + "orthonormal", ortho, 1e-12);
      rep.add(pre + "P_invariant", leak, 1e-10);
    }
    record("decompose", rep);
    nlohmann::ordered_json j;
    j["model"] = "polarization";
    j["cutoff"] = cfg_.cutoff;
    j["blocks"] = block_inventory_json(all);
    result_.artifacts.add_json("blocks.json", j);
  }

  void pol_pscalar() {
    std::map<std::pair<int, int>, int> powers;
    for (const auto& c : cfg_.pscalar.clusters) powers[{c[0], c[1]}] += c[2];
    const auto psi = p_scalar_state(pol(), powers);
    const auto mom = verify_p_scalar(pol(), psi, cfg_.pscalar.max_order);
    record("pscalar", mom.report);
    nlohmann::ordered_json j;
    auto cl = nlohmann::ordered_json::array();
    for (const auto& [ij, k] : powers) cl.push_back({ij.first, ij.second, k});
    j["clusters"] = cl;
    j["max_order"] = cfg_.pscalar.max_order;
    j["max_abs"] = mom.max_abs;
    j["moments"] = mom.to_json();
    result_.artifacts.add_json("moments.json", j);
  }

  void pol_evolve() {
    const auto& p = pol();
    const auto H = build_polarization_hamiltonian(p, cfg_.pol_params);
    for (int two_p : cfg_.evolve.two_p) {
      const auto sector = polarization_sector(p, two_p, cfg_.cutoff);
      const auto Hb = restrict_to_block(H, sector);
      const std::vector<NamedMatrix> conserved = {{"P2", restrict_to_block(p.P2sq, sector).matrix}};
      const std::vector<NamedMatrix> ops = {{"P0", restrict_to_block(p.P0, sector).matrix},
                                            {"P1", restrict_to_block(p.P1, sector).matrix},
                                            {"P2", conserved[0].matrix}};
      Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(sector.dimension);
      psi0(0) = 1.0;
      evolve_and_record("2p=" + std::to_string(two_p), "2p" + std::to_string(two_p), Hb, psi0, conserved, ops);
    }
  }

  const ScenarioConfig& cfg_;
  RunOptions opts_;
  ScenarioResult result_;
  std::optional<PlaGenerators> gen_;
  std::optional<PolarizationOps> pol_;
  std::optional<MpsHamiltonianParams> params_;
};

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  return ScenarioRunner(config, options).run();
}

}  // namespace polyalg
