// Command-line front end: every task consumes a JSON config, runs one of the
// compute modules and emits deterministic CSV/JSON artifacts.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "hall_edge_lab/ed_oracle.hpp"
#include "hall_edge_lab/io.hpp"
#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/reference_model.hpp"
#include "hall_edge_lab/response.hpp"
#include "hall_edge_lab/rg_audit.hpp"
#include "hall_edge_lab/spectral.hpp"
#include "hall_edge_lab/topology.hpp"

namespace fs = std::filesystem;
using namespace hel;

namespace {

double param(const RunConfig& cfg, const std::string& key, double fallback) {
  auto it = cfg.params.find(key);
  return it == cfg.params.end() ? fallback : it->second;
}

std::vector<double> param_seq(const RunConfig& cfg, const std::string& key,
                              std::vector<double> fallback) {
  auto n = cfg.params.find(key + ".n");
  if (n == cfg.params.end()) return fallback;
  std::vector<double> out;
  for (int i = 0; i < static_cast<int>(n->second); ++i)
    out.push_back(cfg.params.at(key + "." + std::to_string(i)));
  return out;
}

Channel channel_of(const RunConfig& cfg) {
  auto it = cfg.sparams.find("channel");
  if (it == cfg.sparams.end() || it->second == "charge")
    return Channel::Charge;
  if (it->second == "spin") return Channel::Spin;
  throw ConfigError("channel must be 'charge' or 'spin'");
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

void run_bands(const RunConfig& cfg) {
  const auto m = model_from_config(cfg);
  const int grid_n = static_cast<int>(param(cfg, "grid_n", m.L()));
  const KGrid grid{grid_n, grid_n != m.L()};
  const auto branches = band_structure(m, grid, cfg.workers);
  CsvWriter csv(out_path(cfg, "bands.csv"), cfg, {"k1", "branch", "energy"});
  for (const auto& b : branches)
    for (std::size_t j = 0; j < b.k1.size(); ++j)
      csv.row({b.k1[j], static_cast<double>(b.index), b.energy[j]});
  JsonValue data = JsonValue::object();
  data.set("branches", static_cast<long long>(branches.size()));
  data.set("grid_n", static_cast<long long>(grid_n));
  data.set("analysis_grid", grid.analysis);
  write_json_artifact(out_path(cfg, "bands.json"), cfg, std::move(data));
}

void run_edge(const RunConfig& cfg) {
  const auto m = model_from_config(cfg);
  const KGrid grid = KGrid::lattice(m);
  const auto states = detect_edge_states(m, cfg.mu, grid,
                                         {.workers = cfg.workers});
  CsvWriter csv(out_path(cfg, "edge_states.csv"), cfg,
                {"channel", "spin", "kF_grid", "kF_refined", "velocity",
                 "omega", "decay_rate", "side"});
  for (const auto& s : states)
    csv.row({static_cast<double>(s.channel), static_cast<double>(s.spin),
             s.kF_grid, s.kF_refined, s.velocity,
             static_cast<double>(s.omega), s.decay_rate,
             s.side == Side::LowerEdge ? 0.0 : 1.0});
  const auto verdict = audit_assumptions(m, cfg.mu, grid);
  JsonValue v = JsonValue::object();
  v.set("n_edge", static_cast<long long>(verdict.n_edge));
  v.set("spin_degenerate", verdict.spin_degenerate);
  v.set("single_channel", verdict.single_channel);
  JsonValue kf = JsonValue::array();
  for (double k : verdict.fermi_points) kf.push(k);
  v.set("fermi_points", std::move(kf));
  JsonValue checks = JsonValue::array();
  for (const auto& d : verdict.decay_checks) {
    JsonValue c = JsonValue::object();
    c.set("order", static_cast<long long>(d.order));
    c.set("rate", d.rate);
    c.set("prefactor", d.prefactor);
    c.set("residual", d.residual);
    c.set("ok", d.ok);
    checks.push(std::move(c));
  }
  v.set("decay_checks", std::move(checks));
  JsonValue fails = JsonValue::array();
  for (const auto& f : verdict.failures) fails.push(f);
  v.set("failures", std::move(fails));
  write_json_artifact(out_path(cfg, "edge_audit.json"), cfg, std::move(v));
}

void run_chern(const RunConfig& cfg) {
  const auto m = model_from_config(cfg).with_boundary(Boundary::Torus);
  const int grid_n = static_cast<int>(param(cfg, "grid_n", 60));
  const auto r = hall_conductivity(m, cfg.mu, grid_n, cfg.workers);
  JsonValue data = JsonValue::object();
  JsonValue cs = JsonValue::array();
  for (int c : r.C_per_spin) cs.push(static_cast<long long>(c));
  data.set("C_per_spin", std::move(cs));
  data.set("sigma12", r.sigma12);
  data.set("sigma21", r.sigma21);
  data.set("grid", static_cast<long long>(r.grid_n));
  data.set("refinement_delta", static_cast<long long>(r.refinement_delta));
  data.set("orientation", "right-handed (k1,k2)");
  write_json_artifact(out_path(cfg, "chern.json"), cfg, std::move(data));
  // optional phase-diagram sweep in W
  if (cfg.params.count("sweep_from")) {
    const double from = param(cfg, "sweep_from", 0.0);
    const double to = param(cfg, "sweep_to", 1.0);
    const double step = param(cfg, "sweep_step", 0.05);
    std::vector<double> Ws;
    for (double w = from; w <= to + 1e-12; w += step) Ws.push_back(w);
    const auto pts =
        phase_sweep(cfg.haldane, cfg.mu, Ws, grid_n, cfg.workers);
    CsvWriter csv(out_path(cfg, "phase_sweep.csv"), cfg,
                  {"W", "t2_sin_phi", "C"});
    for (const auto& p : pts)
      csv.row({p.W, p.t2_sin_phi, static_cast<double>(p.C)});
  }
}

void run_correlators(const RunConfig& cfg) {
  const auto m = model_from_config(cfg);
  CorrelatorRequest req;
  req.beta = param(cfg, "beta", 10.0);
  req.eta = param(cfg, "eta", 0.0);
  req.p1 = param(cfg, "p1", 0.0);
  req.mu = static_cast<int>(param(cfg, "mu_idx", 0));
  req.nu = static_cast<int>(param(cfg, "nu_idx", 0));
  req.channel = channel_of(cfg);
  for (double v : param_seq(cfg, "x2_set", {1, 2}))
    req.x2_set.push_back(static_cast<int>(v));
  for (double v : param_seq(cfg, "y2_set", {1, 2}))
    req.y2_set.push_back(static_cast<int>(v));
  const int grid_n = static_cast<int>(param(cfg, "grid_n", m.L()));
  const KQuadrature quad = KQuadrature::lattice_grid(grid_n);
  const auto res = bubble_correlator(m, cfg.mu, req, quad, cfg.workers);
  CsvWriter csv(out_path(cfg, "correlators.csv"), cfg,
                {"x2", "y2", "re", "im"});
  for (const auto& [key, val] : res.values)
    csv.row({static_cast<double>(key.first), static_cast<double>(key.second),
             val.real(), val.imag()});
  JsonValue data = JsonValue::object();
  data.set("beta", res.beta);
  data.set("eta_raw", res.eta_raw);
  data.set("eta_beta", res.eta_beta);
  data.set("p1", res.p1);
  data.set("analysis_grid", res.analysis_grid);
  write_json_artifact(out_path(cfg, "correlators.json"), cfg,
                      std::move(data));
}

void run_transport(const RunConfig& cfg) {
  const auto m = model_from_config(cfg);
  const auto beta_seq = param_seq(cfg, "beta_seq", {param(cfg, "beta", 200.0)});
  const auto eps_seq = param_seq(cfg, "eps_seq", {0.2, 0.1, 0.05});
  const int a = static_cast<int>(param(cfg, "a", 16));
  const int ap = static_cast<int>(param(cfg, "a_prime", 8));
  TransportOptions opt;
  opt.workers = cfg.workers;
  const auto tc = transport_limits(m, cfg.mu, beta_seq, eps_seq, a, ap,
                                   channel_of(cfg), opt);
  CsvWriter csv(out_path(cfg, "transport_raw.csv"), cfg,
                {"coefficient", "eps", "eta_raw", "eta_beta", "p1", "re",
                 "im"});
  auto dump_trace = [&](const char* name, const CoefficientTrace& t) {
    for (const auto& p : t.raw)
      csv.row_mixed({name, format_double17(p.eps), format_double17(p.eta_raw),
                     format_double17(p.eta_beta), format_double17(p.p1),
                     format_double17(p.value.real()),
                     format_double17(p.value.imag())});
  };
  dump_trace("kappa", tc.kappa);
  dump_trace("D", tc.D);
  dump_trace("G", tc.G);
  dump_trace("Gtilde", tc.Gtilde);
  dump_trace("reversed_g00", tc.reversed_g00);

  JsonValue data = JsonValue::object();
  auto put = [&](const char* name, const CoefficientTrace& t) {
    JsonValue j = JsonValue::object();
    j.set("value", t.limit.value);
    j.set("error", t.limit.error);
    j.set("fitted_order", t.limit.fitted_order);
    data.set(name, std::move(j));
  };
  put("kappa", tc.kappa);
  put("D", tc.D);
  put("G", tc.G);
  put("Gtilde", tc.Gtilde);
  put("reversed_g00", tc.reversed_g00);
  data.set("a_sensitivity", tc.a_sensitivity);
  data.set("beta", tc.beta);
  data.set("a", static_cast<long long>(tc.a));
  data.set("a_prime", static_cast<long long>(tc.a_prime));
  // bulk-edge comparison against the torus twin
  if (m.boundary() == Boundary::CylinderDirichlet) {
    const int cgrid = static_cast<int>(param(cfg, "chern_grid", 60));
    const auto hall = hall_conductivity(m.with_boundary(Boundary::Torus),
                                        cfg.mu, cgrid, cfg.workers);
    JsonValue be = JsonValue::object();
    be.set("sigma21", hall.sigma21);
    be.set("G_minus_sigma21", tc.G.limit.value - hall.sigma21);
    data.set("bulk_edge", std::move(be));
  }
  write_json_artifact(out_path(cfg, "transport.json"), cfg, std::move(data));
}

void run_ward(const RunConfig& cfg) {
  const auto m = model_from_config(cfg);
  const double beta = param(cfg, "beta", 8.0);
  const int trials = static_cast<int>(param(cfg, "trials", 20));
  std::mt19937_64 rng(static_cast<uint64_t>(cfg.seed));
  std::uniform_int_distribution<int> pn(-m.L() / 2, m.L() / 2);
  std::uniform_int_distribution<int> en(-10, 10);
  std::uniform_int_distribution<int> nud(0, 1);
  std::uniform_int_distribution<int> y2d(0, m.L());
  JsonValue rows = JsonValue::array();
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double p1 = kTwoPi * pn(rng) / m.L();
    const double eta = kTwoPi * en(rng) / beta;
    const int nu = nud(rng);
    const int y2 = y2d(rng);
    const auto r = ward_residual(m, cfg.mu, beta, eta, p1, nu,
                                 channel_of(cfg), y2, cfg.workers);
    JsonValue row = JsonValue::object();
    row.set("eta_beta", snap_matsubara(eta, beta));
    row.set("p1", p1);
    row.set("nu", static_cast<long long>(nu));
    row.set("y2", static_cast<long long>(y2));
    row.set("residual", r.residual);
    row.set("scale", r.scale);
    row.set("relative", r.relative());
    rows.push(std::move(row));
    if (r.scale > 0) worst = std::max(worst, r.relative());
  }
  JsonValue data = JsonValue::object();
  data.set("beta", beta);
  data.set("worst_relative", worst);
  data.set("residuals", std::move(rows));
  write_json_artifact(out_path(cfg, "ward.json"), cfg, std::move(data));
}

void run_refmodel(const RunConfig& cfg) {
  const double lam = param(cfg, "lambda_ref", 0.5);
  const double v = param(cfg, "v_ref", 1.0);
  const double Z = param(cfg, "Z_ref", 1.0);
  const int omega = static_cast<int>(param(cfg, "omega", 1));
  const auto p = RefModelParams::make(lam, v, omega, Z);
  const auto t = transport_closed_form(p);
  JsonValue data = JsonValue::object();
  data.set("tau", p.tau());
  data.set("v_s", p.v_s());
  data.set("v_c", p.v_c());
  JsonValue tr = JsonValue::object();
  tr.set("kappa_c", t.kappa_c);
  tr.set("D_c", t.D_c);
  tr.set("G_c", t.G_c);
  tr.set("Gtilde_c", t.Gtilde_c);
  tr.set("kappa_s", t.kappa_s);
  tr.set("D_s", t.D_s);
  tr.set("G_s", t.G_s);
  tr.set("Gtilde_s", t.Gtilde_s);
  data.set("transport", std::move(tr));
  JsonValue checks = JsonValue::object();
  checks.set("D_minus_kappa_vc2", t.D_c - t.kappa_c * p.v_c() * p.v_c());
  checks.set("D_minus_kappa_vs2", t.D_s - t.kappa_s * p.v_s() * p.v_s());
  checks.set("G_plus_omega_over_pi", t.G_c + omega / kPi);
  data.set("checks", std::move(checks));
  std::cout << data.dump(2) << "\n";
  write_json_artifact(out_path(cfg, "refmodel.json"), cfg, std::move(data));
}

void run_rgflow(const RunConfig& cfg) {
  const double lam = param(cfg, "lambda", 0.05);
  const double theta = param(cfg, "theta", 0.5);
  const double C = param(cfg, "C", 1.0);
  const int h_min = static_cast<int>(param(cfg, "h_min", -40));
  BetaModel model{C, theta, [=](int k, const FlowState&) {
                    FlowBeta b;
                    b.lambda = lam * lam * std::pow(2.0, theta * k);
                    b.z = 0.5 * lam * lam * std::pow(2.0, theta * k);
                    b.v = 0.25 * lam * lam * std::pow(2.0, theta * k);
                    return b;
                  }};
  const auto tr = flow_iterate({1.0, 1.0, 0.0, lam}, model, h_min);
  CsvWriter csv(out_path(cfg, "rgflow.csv"), cfg,
                {"h", "Z", "v", "nu", "lambda"});
  for (std::size_t i = 0; i < tr.scales.size(); ++i)
    csv.row({static_cast<double>(tr.scales[i]), tr.states[i].Z,
             tr.states[i].v, tr.states[i].nu, tr.states[i].lambda});
  NuBetaModel nu_model{
      2.0, [=](int j, const std::vector<double>& nu, double lambda) {
        const std::size_t i = std::min<std::size_t>(
            std::max(0, j - h_min), nu.empty() ? 0 : nu.size() - 1);
        return lambda * (1.0 + 0.3 * std::sin(1.7 * j)) +
               (nu.empty() ? 0.0 : 0.1 * nu[i]);
      }};
  const auto fp = nu_fixed_point(nu_model, theta, std::max(h_min, -12), lam);
  JsonValue data = JsonValue::object();
  data.set("lambda_drift", tr.lambda_drift);
  data.set("envelope_bound", tr.envelope_bound);
  data.set("within_envelope", tr.within_envelope);
  JsonValue nus = JsonValue::array();
  for (double n : fp.nu) nus.push(n);
  data.set("nu_sequence", std::move(nus));
  data.set("nu_iterations", static_cast<long long>(fp.iterations));
  data.set("nu_contraction_factor", fp.contraction_factor);
  data.set("nu_envelope_constant", fp.envelope_constant);
  write_json_artifact(out_path(cfg, "rgflow.json"), cfg, std::move(data));
}

void run_rgtrees(const RunConfig& cfg) {
  const int n = static_cast<int>(param(cfg, "n", 4));
  const int h = static_cast<int>(param(cfg, "h_root", -3));
  const auto e = enumerate_tree_shapes(n);
  CsvWriter csv(out_path(cfg, "rgtrees.csv"), cfg,
                {"shape", "endpoints", "labelings"});
  long total = 0;
  for (std::size_t i = 0; i < e.shapes.size(); ++i) {
    const long lab = count_scale_labelings(e.shapes[i], h);
    total += lab;
    csv.row({static_cast<double>(i), static_cast<double>(n),
             static_cast<double>(lab)});
  }
  JsonValue data = JsonValue::object();
  data.set("n_endpoints", static_cast<long long>(n));
  data.set("h_root", static_cast<long long>(h));
  data.set("shapes", static_cast<long long>(e.shape_count));
  data.set("bound_4n", static_cast<long long>(e.bound_4n));
  data.set("total_labelings", static_cast<long long>(total));
  write_json_artifact(out_path(cfg, "rgtrees.json"), cfg, std::move(data));
}

void run_ed_check(const RunConfig& cfg) {
  const auto m = model_from_config(cfg);
  const double lambda = param(cfg, "lambda", 0.0);
  const double beta = param(cfg, "beta", 10.0);
  int L1 = 2, L2 = 3;
  if (auto it = cfg.sparams.find("geometry"); it != cfg.sparams.end()) {
    if (sscanf(it->second.c_str(), "%dx%d", &L1, &L2) != 2)
      throw ConfigError("geometry must look like '2x3'");
  }
  const auto sys = FockSystem::build(m, lambda, L1, L2, beta);
  JsonValue rows = JsonValue::array();
  double worst = 0.0;
  for (int ip = 0; ip < L1; ++ip)
    for (int ie : {0, 1, 3}) {
      const double p1 = kTwoPi * ip / L1;
      const double eta = kTwoPi * ie / beta;
      if (p1 == 0.0 && eta == 0.0) continue;
      for (int nu : {0, 1}) {
        const auto r = ed_ward_check(sys, eta, p1, nu, Channel::Charge,
                                     std::min(2, L2));
        JsonValue row = JsonValue::object();
        row.set("p1", p1);
        row.set("eta_beta", eta);
        row.set("nu", static_cast<long long>(nu));
        row.set("relative", r.relative());
        rows.push(std::move(row));
        if (r.scale > 0) worst = std::max(worst, r.relative());
      }
    }
  JsonValue data = JsonValue::object();
  data.set("lambda", lambda);
  data.set("beta", beta);
  data.set("modes", static_cast<long long>(sys.n_modes()));
  data.set("worst_relative", worst);
  data.set("ward_residuals", std::move(rows));
  JsonValue deltas = JsonValue::array();
  for (int y2 = 1; y2 <= L2; ++y2) deltas.push(sys.schwinger_term(y2));
  data.set("schwinger_terms", std::move(deltas));
  write_json_artifact(out_path(cfg, "ed_check.json"), cfg, std::move(data));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hall_edge_lab: edge transport laboratory for interacting "
               "Hall systems"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_path, task_flag, out_flag;
  int workers_flag = -1;
  long long seed_flag = -1;
  app.add_option("--config", config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  app.add_option("--task", task_flag, "task name (overrides the config)");
  app.add_option("--out", out_flag, "output directory (overrides the config)");
  app.add_option("--workers", workers_flag, "worker count");
  app.add_option("--seed", seed_flag, "seed for randomized tasks");

  // every task also exists as a subcommand, so
  // `hall_edge_lab transport --config cfg.json` works
  const std::vector<std::string> tasks = {
      "bands", "edge",    "chern",  "correlators", "transport",
      "ward",  "refmodel", "rgflow", "rgtrees",     "ed-check"};
  std::map<std::string, CLI::App*> subs;
  for (const auto& t : tasks)
    subs[t] = app.add_subcommand(t, "run the '" + t + "' task");

  // task flags that override the config's params block
  double beta_flag = -1.0, lambda_flag = std::nan("");
  int a_flag = -1, ap_flag = -1;
  std::vector<double> eps_flag;
  std::string channel_flag, geometry_flag;
  subs["transport"]->add_option("--beta", beta_flag, "inverse temperature");
  subs["transport"]->add_option("--eps-seq", eps_flag,
                                "decreasing epsilon sequence");
  subs["transport"]->add_option("--a", a_flag, "outer strip width");
  subs["transport"]->add_option("--a-prime", ap_flag, "inner strip width");
  subs["transport"]->add_option("--channel", channel_flag, "charge|spin");
  subs["ed-check"]->add_option("--lambda", lambda_flag, "coupling strength");
  subs["ed-check"]->add_option("--beta", beta_flag, "inverse temperature");
  subs["ed-check"]->add_option("--geometry", geometry_flag,
                               "strip geometry, e.g. 2x3");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      cfg = parse_config_file(config_path);
    } else {
      cfg.task = "";
      cfg.canonical = "{}";
      cfg.config_hash = fnv1a64(cfg.canonical);
    }
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) cfg.task = name;
    if (!task_flag.empty()) cfg.task = task_flag;
    if (!out_flag.empty()) cfg.out_dir = out_flag;
    if (workers_flag >= 0) cfg.workers = workers_flag;
    if (seed_flag >= 0) cfg.seed = seed_flag;
    if (cfg.task.empty())
      throw ConfigError("no task given (use --task or a subcommand)");
    if (beta_flag > 0) cfg.params["beta"] = beta_flag;
    if (!std::isnan(lambda_flag)) cfg.params["lambda"] = lambda_flag;
    if (a_flag >= 0) cfg.params["a"] = a_flag;
    if (ap_flag >= 0) cfg.params["a_prime"] = ap_flag;
    if (!eps_flag.empty()) {
      for (std::size_t i = 0; i < eps_flag.size(); ++i)
        cfg.params["eps_seq." + std::to_string(i)] = eps_flag[i];
      cfg.params["eps_seq.n"] = static_cast<double>(eps_flag.size());
    }
    if (!channel_flag.empty()) cfg.sparams["channel"] = channel_flag;
    if (!geometry_flag.empty()) cfg.sparams["geometry"] = geometry_flag;

    if (cfg.task == "bands") run_bands(cfg);
    else if (cfg.task == "edge") run_edge(cfg);
    else if (cfg.task == "chern") run_chern(cfg);
    else if (cfg.task == "correlators") run_correlators(cfg);
    else if (cfg.task == "transport") run_transport(cfg);
    else if (cfg.task == "ward") run_ward(cfg);
    else if (cfg.task == "refmodel") run_refmodel(cfg);
    else if (cfg.task == "rgflow") run_rgflow(cfg);
    else if (cfg.task == "rgtrees") run_rgtrees(cfg);
    else if (cfg.task == "ed-check") run_ed_check(cfg);
    else throw ConfigError("unknown task '" + cfg.task + "'");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
