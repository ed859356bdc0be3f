// kgseries: command-line driver for the tree-series toolkit.
//
// Subcommands:
//   trees        planar tree counts and growth bounds (CSV)
//   classical    truncated series vs a time-stepped reference (JSON + CSV)
//   quantum      graded unitarity / series-identity checks (JSON)
//   convergence  one-parameter error sweeps with optional log-log fit (CSV)
//
// stdout carries the primary artifact; the same artifact is written under
// --outdir (or $KGSERIES_OUTDIR, or the working directory). Failures print
// {"schema_version":1,"error":{category,message}} and exit with
//   2 on configuration/input errors, 3 on divergence, 4 on truncation,
//   1 on anything unexpected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kgseries/butcher.hpp"
#include "kgseries/errors.hpp"
#include "kgseries/evolve.hpp"
#include "kgseries/field.hpp"
#include "kgseries/fit.hpp"
#include "kgseries/fock.hpp"
#include "kgseries/grid.hpp"
#include "kgseries/initial_data.hpp"
#include "kgseries/integrator.hpp"
#include "kgseries/ptree.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Non-finite doubles have no JSON number representation; tag them instead.
ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::filesystem::path resolve_outdir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("KGSERIES_OUTDIR"); env != nullptr && *env != '\0')
    return env;
  return ".";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw kgs::ConfigError("cannot write " + path.string());
}

// Collects every violated key so one run reports the full list.
class Validator {
 public:
  void require(bool ok, const std::string& message) {
    if (!ok) issues_.push_back(message);
  }
  void finish() const {
    if (issues_.empty()) return;
    std::string all = issues_.front();
    for (std::size_t i = 1; i < issues_.size(); ++i) all += "; " + issues_[i];
    throw kgs::ConfigError(all);
  }

 private:
  std::vector<std::string> issues_;
};

// CLI11 processes config files on the top-level app only, so each subcommand
// carries a plain --config option and the file is applied here: keys fill
// exactly the options the command line left unset, so flags override the file.
void apply_config_file(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream is(path);
  if (!is) throw kgs::ConfigError("config: cannot read " + path);
  Validator v;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string entry = CLI::detail::trim_copy(line);
    if (entry.empty() || entry[0] == '#') continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      v.require(false,
                "config line " + std::to_string(lineno) + ": expected key=value, got \"" +
                    entry + "\"");
      continue;
    }
    const std::string key = CLI::detail::trim_copy(entry.substr(0, eq));
    const std::string value = CLI::detail::trim_copy(entry.substr(eq + 1));
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      v.require(false, key + ": unknown config key");
      continue;
    }
    if (opt->count() > 0) continue;  // set on the command line; that wins
    try {
      opt->add_result(opt->get_expected_min() == 0 ? opt->get_flag_value(key, value)
                                                   : value);
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      v.require(false, key + ": " + std::string(e.what()));
    }
  }
  v.finish();
}

double max_sobolev(const kgs::TimeSampledField& f, double q) {
  double best = 0.0;
  kgs::FieldSnapshot snap(f.grid);
  for (const auto& sample : f.values) {
    snap.values = sample;
    best = std::max(best, kgs::sobolev_norm(snap, q));
  }
  return best;
}

double max_diff_sobolev(const kgs::TimeSampledField& a, const kgs::TimeSampledField& b,
                        double q) {
  if (a.grid != b.grid) throw kgs::ShapeError("comparison fields live on different grids");
  if (a.sample_count() != b.sample_count() || a.time.dt != b.time.dt)
    throw kgs::ShapeError("comparison fields carry different sample grids");
  double best = 0.0;
  kgs::FieldSnapshot diff(a.grid);
  for (std::size_t j = 0; j < a.sample_count(); ++j) {
    for (std::size_t i = 0; i < diff.values.size(); ++i)
      diff.values[i] = a.values[j][i] - b.values[j][i];
    best = std::max(best, kgs::sobolev_norm(diff, q));
  }
  return best;
}

// ---------------------------------------------------------------------------
// trees

struct TreesOptions {
  int p = 2;
  int max_order = 4;
  bool keys = false;
  std::string outdir;
};

void run_trees(const TreesOptions& opt) {
  Validator v;
  v.require(opt.p >= 2, "p: must be >= 2, got " + std::to_string(opt.p));
  v.require(opt.max_order >= 0,
            "max-order: must be >= 0, got " + std::to_string(opt.max_order));
  v.finish();

  if (opt.keys) {
    const std::uint64_t total = kgs::count_trees(opt.p, opt.max_order);
    if (total > 200000)
      throw kgs::ConfigError("keys: order " + std::to_string(opt.max_order) + " holds " +
                             std::to_string(total) + " trees; the listing cap is 200000");
  }

  std::ostringstream csv;
  csv << "order,count,bound\n";
  for (int n = 0; n <= opt.max_order; ++n)
    csv << n << "," << kgs::count_trees(opt.p, n) << ","
        << format_double(kgs::count_bound(opt.p, n)) << "\n";

  const auto outdir = resolve_outdir(opt.outdir);
  write_text(outdir / "trees.csv", csv.str());

  if (opt.keys) {
    std::ostringstream keys;
    keys << "order,key\n";
    for (int n = 0; n <= opt.max_order; ++n)
      for (const auto& b : kgs::enumerate_trees(opt.p, n)) keys << n << "," << b.key() << "\n";
    write_text(outdir / "trees_keys.csv", keys.str());
  }

  std::cout << csv.str();
}

// ---------------------------------------------------------------------------
// classical

struct ClassicalScenario {
  int p = 2;
  double lambda = 0.0625;
  int order = 2;
  int dims = 1;
  int grid_n = 64;
  double box_L = 6.283185307179586;  // 2*pi: integer wavevectors
  double mass = 1.0;
  double T = 0.5;
  double dt = 0.0078125;
  double q = 1.0;
  double c_q = 0.0;  // 0: estimate from the grid
  bool dealias = false;
  std::string scheme = "strang";
  int ref_substeps = 4;
  std::uint64_t seed = 1;
  std::string phi0;  // empty: seeded band-limited default
  std::string phi1;
  double normalize = 1.0;
};

void add_classical_options(CLI::App* app, ClassicalScenario& sc) {
  app->add_option("--p", sc.p, "nonlinearity power (children per internal vertex)")
      ->capture_default_str();
  app->add_option("--lambda", sc.lambda, "coupling constant")->capture_default_str();
  app->add_option("--order", sc.order, "series truncation order")->capture_default_str();
  app->add_option("--dims", sc.dims, "spatial dimensions (1-3)")->capture_default_str();
  app->add_option("--grid-n", sc.grid_n, "lattice sites per axis (even)")
      ->capture_default_str();
  app->add_option("--box-L", sc.box_L, "torus side length (default 2*pi)")
      ->capture_default_str();
  app->add_option("--mass", sc.mass, "field mass")->capture_default_str();
  app->add_option("--T", sc.T, "time horizon")->capture_default_str();
  app->add_option("--dt", sc.dt, "series sample step")->capture_default_str();
  app->add_option("--q", sc.q, "Sobolev index (must exceed dims/2)")->capture_default_str();
  app->add_option("--cq", sc.c_q, "algebra constant; 0 estimates it from the grid")
      ->capture_default_str();
  app->add_flag("--dealias", sc.dealias, "zero-padded products in the series");
  app->add_option("--scheme", sc.scheme, "reference integrator: strang | leapfrog")
      ->capture_default_str();
  app->add_option("--ref-substeps", sc.ref_substeps, "reference runs at dt/substeps")
      ->capture_default_str();
  app->add_option("--seed", sc.seed, "seed of the default band-limited data")
      ->capture_default_str();
  app->add_option("--phi0", sc.phi0,
                  "initial value spec: zero | gaussian:center=,sigma=,amp= | "
                  "mode:j=,amp=,phase= | bandlimited:seed=,band=,amp=");
  app->add_option("--phi1", sc.phi1, "initial velocity spec (same grammar)");
  app->add_option("--normalize", sc.normalize,
                  "rescale data so |phi0|_{q+1} + |phi1|_q equals this; 0 keeps raw data")
      ->capture_default_str();
}

// `swept` names a key whose base value is replaced per sweep row and is
// therefore exempt from base validation.
void validate_classical(const ClassicalScenario& sc, const std::string& swept = "") {
  Validator v;
  v.require(sc.p >= 2, "p: must be >= 2, got " + std::to_string(sc.p));
  if (swept != "order")
    v.require(sc.order >= 0, "order: must be >= 0, got " + std::to_string(sc.order));
  v.require(sc.dims >= 1 && sc.dims <= 3,
            "dims: must be in [1,3], got " + std::to_string(sc.dims));
  if (swept != "grid_n")
    v.require(sc.grid_n >= 2 && sc.grid_n % 2 == 0,
              "grid-n: must be even and >= 2, got " + std::to_string(sc.grid_n));
  v.require(std::isfinite(sc.box_L) && sc.box_L > 0, "box-L: must be positive");
  v.require(std::isfinite(sc.mass) && sc.mass > 0, "mass: must be positive");
  v.require(std::isfinite(sc.T) && sc.T > 0, "T: must be positive");
  if (swept != "dt") {
    v.require(std::isfinite(sc.dt) && sc.dt > 0, "dt: must be positive");
    if (std::isfinite(sc.dt) && sc.dt > 0 && std::isfinite(sc.T) && sc.T > 0) {
      try {
        kgs::make_time_grid(sc.T, sc.dt);
      } catch (const kgs::Error& e) {
        v.require(false, std::string("dt: ") + e.what());
      }
    }
  }
  v.require(std::isfinite(sc.q) && sc.q > sc.dims / 2.0,
            "q: must exceed dims/2 for the product estimate");
  if (swept != "lambda")
    v.require(std::isfinite(sc.lambda), "lambda: must be finite");
  v.require(std::isfinite(sc.c_q) && sc.c_q >= 0, "cq: must be >= 0");
  v.require(sc.ref_substeps >= 1,
            "ref-substeps: must be >= 1, got " + std::to_string(sc.ref_substeps));
  v.require(std::isfinite(sc.normalize) && sc.normalize >= 0, "normalize: must be >= 0");
  try {
    kgs::parse_scheme(sc.scheme);
  } catch (const kgs::Error& e) {
    v.require(false, std::string("scheme: ") + e.what());
  }
  v.finish();
}

struct BuiltClassical {
  kgs::GridSpec grid;
  kgs::CauchyData data;
  std::string phi0_spec;
  std::string phi1_spec;
};

BuiltClassical build_classical(const ClassicalScenario& sc, int grid_n) {
  BuiltClassical b;
  b.grid.d = sc.dims;
  b.grid.n = grid_n;
  b.grid.L = sc.box_L;
  b.grid.m = sc.mass;
  b.phi0_spec = sc.phi0.empty()
                    ? "bandlimited:seed=" + std::to_string(sc.seed) + ",band=2,amp=1"
                    : sc.phi0;
  b.phi1_spec = sc.phi1.empty()
                    ? "bandlimited:seed=" + std::to_string(sc.seed + 1) + ",band=2,amp=1"
                    : sc.phi1;
  b.data = kgs::make_cauchy_data(b.grid, b.phi0_spec, b.phi1_spec, sc.q, sc.normalize);
  return b;
}

kgs::SeriesConfig make_series_config(const ClassicalScenario& sc, const BuiltClassical& b,
                                     double dt) {
  kgs::SeriesConfig cfg;
  cfg.p = sc.p;
  cfg.lambda = sc.lambda;
  cfg.grid = b.grid;
  cfg.data = b.data;
  cfg.T = sc.T;
  cfg.dt = dt;
  cfg.q = sc.q;
  cfg.max_order = sc.order;
  cfg.c_q = sc.c_q;
  cfg.dealias = sc.dealias;
  return cfg;
}

// Reference trajectory at dt/substeps, recorded on the series sample grid.
kgs::TimeSampledField make_reference(const ClassicalScenario& sc, const BuiltClassical& b,
                                     double lambda, double dt) {
  kgs::IntegratorConfig cfg;
  cfg.scheme = kgs::parse_scheme(sc.scheme);
  cfg.p = sc.p;
  cfg.lambda = lambda;
  cfg.T = sc.T;
  cfg.dt = dt / sc.ref_substeps;
  cfg.record_every = sc.ref_substeps;
  cfg.validate(b.grid);
  return kgs::integrate(b.data, cfg);
}

ordered_json classical_config_json(const ClassicalScenario& sc, const BuiltClassical& b) {
  ordered_json grid;
  grid["dims"] = b.grid.d;
  grid["n"] = b.grid.n;
  grid["L"] = b.grid.L;
  grid["mass"] = b.grid.m;
  ordered_json cfg;
  cfg["p"] = sc.p;
  cfg["lambda"] = sc.lambda;
  cfg["order"] = sc.order;
  cfg["grid"] = grid;
  cfg["T"] = sc.T;
  cfg["dt"] = sc.dt;
  cfg["q"] = sc.q;
  cfg["cq"] = sc.c_q;
  cfg["dealias"] = sc.dealias;
  cfg["scheme"] = sc.scheme;
  cfg["ref_substeps"] = sc.ref_substeps;
  cfg["phi0"] = b.phi0_spec;
  cfg["phi1"] = b.phi1_spec;
  cfg["normalize"] = sc.normalize;
  return cfg;
}

void run_classical(const ClassicalScenario& sc, const std::string& outdir_flag,
                   bool reference_only) {
  validate_classical(sc);
  const BuiltClassical built = build_classical(sc, sc.grid_n);
  const kgs::TimeSampledField reference = make_reference(sc, built, sc.lambda, sc.dt);

  const std::vector<double> energies = kgs::energy_series(reference, sc.lambda, sc.p);
  const double e0 = energies.front();
  double drift = 0.0;
  for (double e : energies) drift = std::max(drift, std::abs(e - e0));
  const double rel_drift = drift / std::max(std::abs(e0), 1e-300);

  ordered_json report;
  report["schema_version"] = kSchemaVersion;
  report["mode"] = reference_only ? "classical-reference" : "classical";
  report["config"] = classical_config_json(sc, built);
  report["data_norm"] = kgs::sobolev_norm(built.data.phi0, sc.q + 1.0) +
                        kgs::sobolev_norm(built.data.phi1, sc.q);
  ordered_json ref_block;
  ref_block["samples"] = reference.sample_count();
  ref_block["energy_initial"] = energies.front();
  ref_block["energy_final"] = energies.back();
  ref_block["energy_max_rel_drift"] = rel_drift;
  report["reference"] = ref_block;

  std::ostringstream csv;
  const kgs::TimeSampledField* series = nullptr;
  std::vector<kgs::TimeSampledField> sums;

  if (!reference_only) {
    kgs::SeriesEngine engine(make_series_config(sc, built, sc.dt));
    report["algebra_constant"] = engine.algebra_constant();
    report["threshold"] = json_number(engine.threshold());
    report["lambda_below_threshold"] = std::abs(sc.lambda) < engine.threshold();

    sums.reserve(static_cast<std::size_t>(sc.order) + 1);
    ordered_json orders = ordered_json::array();
    for (int n = 0; n <= sc.order; ++n) {
      sums.push_back(engine.partial_sum(n));
      double term_bound = 0.0;
      for (const auto& cls : engine.classes(n))
        term_bound += std::pow(std::abs(sc.lambda), n) *
                      static_cast<double>(cls.multiplicity) * engine.coefficient_norm(cls.rep);
      ordered_json row;
      row["order"] = n;
      row["classes"] = engine.classes(n).size();
      row["planar_trees"] = kgs::count_trees(sc.p, n);
      row["term_norm_bound"] = term_bound;
      row["partial_sum_norm"] = max_sobolev(sums.back(), sc.q);
      row["error_vs_reference"] = max_diff_sobolev(sums.back(), reference, sc.q);
      row["residual"] = kgs::residual(sums.back(), sc.q, sc.lambda, sc.p, sc.dealias);
      orders.push_back(row);
    }
    report["orders"] = orders;
    series = &sums.back();

    if (sc.lambda == 0.0) {
      const kgs::TimeSampledField free = kgs::free_field(built.data, sc.T, sc.dt);
      ordered_json cmp;
      cmp["series_vs_reference"] = max_diff_sobolev(*series, reference, sc.q);
      cmp["series_vs_free"] = max_diff_sobolev(*series, free, sc.q);
      cmp["reference_vs_free"] = max_diff_sobolev(reference, free, sc.q);
      report["free_comparison"] = cmp;
    }
  }

  kgs::FieldSnapshot snap(built.grid);
  if (reference_only) {
    csv << "t,reference_hq,energy\n";
    for (std::size_t j = 0; j < reference.sample_count(); ++j) {
      snap.values = reference.values[j];
      csv << format_double(reference.sample_time(j)) << ","
          << format_double(kgs::sobolev_norm(snap, sc.q)) << ","
          << format_double(energies[j]) << "\n";
    }
  } else {
    csv << "t,series_hq,reference_hq,diff_hq,energy\n";
    kgs::FieldSnapshot diff(built.grid);
    for (std::size_t j = 0; j < reference.sample_count(); ++j) {
      snap.values = reference.values[j];
      const double ref_hq = kgs::sobolev_norm(snap, sc.q);
      snap.values = series->values[j];
      const double ser_hq = kgs::sobolev_norm(snap, sc.q);
      for (std::size_t i = 0; i < diff.values.size(); ++i)
        diff.values[i] = series->values[j][i] - reference.values[j][i];
      csv << format_double(reference.sample_time(j)) << "," << format_double(ser_hq) << ","
          << format_double(ref_hq) << "," << format_double(kgs::sobolev_norm(diff, sc.q))
          << "," << format_double(energies[j]) << "\n";
    }
  }

  const auto outdir = resolve_outdir(outdir_flag);
  const auto report_path =
      outdir / (reference_only ? "classical_reference.json" : "classical.json");
  const auto csv_path = outdir / "classical_series.csv";
  ordered_json artifacts;
  artifacts["report"] = report_path.string();
  artifacts["series_csv"] = csv_path.string();
  report["artifacts"] = artifacts;

  const std::string text = report.dump(2) + "\n";
  write_text(report_path, text);
  write_text(csv_path, csv.str());
  std::cout << text;
}

// ---------------------------------------------------------------------------
// quantum

struct QuantumScenario {
  int p = 2;
  int modes = 1;
  int n_max = 6;
  double box_L = 1.0;
  double mass = 1.0;
  double t0 = 0.0;
  double t = 0.5;
  int order = 2;
  double dtau = 0.03125;
  int levels = 3;
  double x = 0.0;
  int sign = 1;
};

void add_quantum_options(CLI::App* app, QuantumScenario& qs, bool shared_names) {
  // Inside `convergence` the lattice/mass/power flags are shared with the
  // classical set, so only the quantum-specific ones are added there.
  if (!shared_names) {
    app->add_option("--p", qs.p, "nonlinearity power")->capture_default_str();
    app->add_option("--box-L", qs.box_L, "torus side length")->capture_default_str();
    app->add_option("--mass", qs.mass, "field mass")->capture_default_str();
    app->add_option("--order", qs.order, "largest checked coupling grade")
        ->capture_default_str();
  }
  app->add_option("--modes", qs.modes, "retained wavevectors (odd)")->capture_default_str();
  app->add_option("--nmax", qs.n_max, "occupation cutoff per mode")->capture_default_str();
  app->add_option("--t0", qs.t0, "initial time")->capture_default_str();
  app->add_option("--t", qs.t, "final time")->capture_default_str();
  app->add_option("--dtau", qs.dtau, "coarsest quadrature step")->capture_default_str();
  if (!shared_names)
    app->add_option("--levels", qs.levels, "dtau refinement halvings per check")
        ->capture_default_str();
  app->add_option("--x", qs.x, "field evaluation position")->capture_default_str();
  app->add_option("--sign", qs.sign, "evolution phase convention: +1, or -1 as a control")
      ->capture_default_str();
}

void validate_quantum(const QuantumScenario& qs, const std::string& swept = "") {
  Validator v;
  v.require(qs.p >= 2, "p: must be >= 2, got " + std::to_string(qs.p));
  v.require(qs.modes >= 1 && qs.modes % 2 == 1,
            "modes: must be odd and >= 1, got " + std::to_string(qs.modes));
  v.require(qs.n_max >= 1, "nmax: must be >= 1, got " + std::to_string(qs.n_max));
  v.require(std::isfinite(qs.box_L) && qs.box_L > 0, "box-L: must be positive");
  v.require(std::isfinite(qs.mass) && qs.mass > 0, "mass: must be positive");
  v.require(std::isfinite(qs.t0) && std::isfinite(qs.t) && qs.t >= qs.t0,
            "t: must be >= t0");
  v.require(qs.order >= 0, "order: must be >= 0, got " + std::to_string(qs.order));
  v.require(qs.levels >= 1, "levels: must be >= 1, got " + std::to_string(qs.levels));
  v.require(qs.sign == 1 || qs.sign == -1, "sign: must be +1 or -1");
  v.require(std::isfinite(qs.x), "x: must be finite");
  if (swept != "dtau") {
    v.require(std::isfinite(qs.dtau) && qs.dtau > 0, "dtau: must be positive");
    if (std::isfinite(qs.dtau) && qs.dtau > 0 && qs.t >= qs.t0) {
      const double steps = (qs.t - qs.t0) / qs.dtau;
      v.require(std::abs(steps - std::llround(steps)) <= 1e-9 * (steps + 1.0),
                "dtau: t - t0 must be an integer multiple of dtau");
    }
  }
  v.finish();
}

kgs::QuantumLatticeSpec make_spec(const QuantumScenario& qs) {
  kgs::QuantumLatticeSpec spec;
  spec.d = 1;
  spec.modes = qs.modes;
  spec.n_max = qs.n_max;
  spec.L = qs.box_L;
  spec.m = qs.mass;
  spec.t0 = qs.t0;
  return spec;
}

ordered_json check_json(const kgs::GradedCheck& c) {
  ordered_json j;
  j["order_m"] = c.order_m;
  j["dtaus"] = c.dtaus;
  j["deviations"] = c.deviations;
  j["exact"] = c.exact;
  j["fitted_rate"] = json_number(c.fitted_rate);
  return j;
}

void run_quantum(const QuantumScenario& qs, const std::string& outdir_flag) {
  validate_quantum(qs);
  const kgs::QuantumLatticeSpec spec = make_spec(qs);

  const int factors = kgs::required_field_factors(qs.p, qs.order);
  const kgs::SafeSubspace sub = kgs::safe_subspace(spec, factors);

  ordered_json report;
  report["schema_version"] = kSchemaVersion;
  report["mode"] = "quantum";
  ordered_json cfg;
  cfg["p"] = qs.p;
  cfg["modes"] = qs.modes;
  cfg["nmax"] = qs.n_max;
  cfg["box_L"] = qs.box_L;
  cfg["mass"] = qs.mass;
  cfg["t0"] = qs.t0;
  cfg["t"] = qs.t;
  cfg["order"] = qs.order;
  cfg["dtau"] = qs.dtau;
  cfg["levels"] = qs.levels;
  cfg["x"] = qs.x;
  cfg["sign"] = qs.sign;
  report["config"] = cfg;
  ordered_json safe;
  safe["dimension"] = spec.dim();
  safe["field_factors"] = factors;
  safe["n_safe"] = sub.n_safe;
  safe["block_size"] = sub.members.size();
  report["safe_subspace"] = safe;

  ordered_json unitarity = ordered_json::array();
  ordered_json identity = ordered_json::array();
  for (int m = 0; m <= qs.order; ++m) {
    unitarity.push_back(
        check_json(kgs::verify_unitarity(spec, qs.p, qs.t, m, qs.dtau, qs.levels, qs.sign)));
    identity.push_back(check_json(
        kgs::verify_series_identity(spec, qs.p, qs.t, qs.x, m, qs.dtau, qs.levels, qs.sign)));
  }
  report["unitarity"] = unitarity;
  report["series_identity"] = identity;

  ordered_json shortcut;
  shortcut["deviation"] =
      kgs::grade1_shortcut_deviation(spec, qs.p, qs.t, qs.x, qs.dtau, qs.sign);
  shortcut["flipped_sign_deviation"] =
      kgs::grade1_shortcut_deviation(spec, qs.p, qs.t, qs.x, qs.dtau, -qs.sign);
  report["grade1_shortcut"] = shortcut;

  const auto outdir = resolve_outdir(outdir_flag);
  const auto report_path = outdir / "quantum.json";
  ordered_json artifacts;
  artifacts["report"] = report_path.string();
  report["artifacts"] = artifacts;

  const std::string text = report.dump(2) + "\n";
  write_text(report_path, text);
  std::cout << text;
}

// ---------------------------------------------------------------------------
// convergence

struct ConvergenceOptions {
  std::string param;
  std::vector<double> values;
  bool fit = false;
  std::string outdir;
};

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

void run_convergence(const ConvergenceOptions& co, const ClassicalScenario& sc,
                     const QuantumScenario& qs) {
  static const std::vector<std::string> kParams = {"lambda", "dt", "dtau", "order",
                                                   "grid_n"};
  Validator v;
  const bool known = std::find(kParams.begin(), kParams.end(), co.param) != kParams.end();
  v.require(known, "param: must be one of lambda, dt, dtau, order, grid_n; got \"" +
                       co.param + "\"");
  v.require(!co.values.empty(), "values: at least one value is required");
  if (known) {
    for (std::size_t i = 0; i < co.values.size(); ++i) {
      const double val = co.values[i];
      const std::string at = "values[" + std::to_string(i) + "]=" + format_double(val);
      if (co.param == "lambda") {
        v.require(std::isfinite(val), at + ": lambda must be finite");
      } else if (co.param == "dt" || co.param == "dtau") {
        v.require(std::isfinite(val) && val > 0, at + ": step must be positive");
      } else if (co.param == "order") {
        v.require(is_integral(val) && val >= 0, at + ": order must be an integer >= 0");
      } else if (co.param == "grid_n") {
        v.require(is_integral(val) && val >= 2 && std::fmod(val, 2.0) == 0.0,
                  at + ": grid size must be an even integer >= 2");
      }
    }
  }
  v.require(!(co.fit && co.param == "order"),
            "fit: a log-log rate over discrete truncation orders is not defined; sweep "
            "lambda, dt, dtau, or grid_n instead");
  v.finish();

  if (co.param == "dtau")
    validate_quantum(qs, "dtau");
  else
    validate_classical(sc, co.param);

  const bool quantum_sweep = (co.param == "dtau");
  std::ostringstream csv;
  std::vector<double> fit_x;
  std::vector<double> fit_y;
  std::string fit_column;

  if (quantum_sweep) {
    const kgs::QuantumLatticeSpec spec = make_spec(qs);
    csv << "param,value,unitarity_deviation,identity_deviation\n";
    fit_column = "identity_deviation";
    for (double val : co.values) {
      const double steps = (qs.t - qs.t0) / val;
      if (std::abs(steps - std::llround(steps)) > 1e-9 * (steps + 1.0))
        throw kgs::ConfigError("values: t - t0 must be an integer multiple of dtau " +
                               format_double(val));
      const auto uni =
          kgs::verify_unitarity(spec, qs.p, qs.t, qs.order, val, 1, qs.sign);
      const auto ident =
          kgs::verify_series_identity(spec, qs.p, qs.t, qs.x, qs.order, val, 1, qs.sign);
      csv << co.param << "," << format_double(val) << ","
          << format_double(uni.deviations.front()) << ","
          << format_double(ident.deviations.front()) << "\n";
      fit_x.push_back(val);
      fit_y.push_back(ident.deviations.front());
    }
  } else {
    csv << "param,value,error,residual\n";
    fit_column = "error";
    auto emit = [&](double val, double err, double res) {
      csv << co.param << "," << format_double(val) << "," << format_double(err) << ","
          << format_double(res) << "\n";
      fit_x.push_back(val);
      fit_y.push_back(err);
    };

    if (co.param == "lambda") {
      const BuiltClassical built = build_classical(sc, sc.grid_n);
      kgs::SeriesEngine engine(make_series_config(sc, built, sc.dt));
      for (double val : co.values) {
        const kgs::TimeSampledField ref = make_reference(sc, built, val, sc.dt);
        const kgs::TimeSampledField sum = engine.partial_sum(sc.order, val);
        emit(val, max_diff_sobolev(sum, ref, sc.q),
             kgs::residual(sum, sc.q, val, sc.p, sc.dealias));
      }
    } else if (co.param == "dt") {
      const BuiltClassical built = build_classical(sc, sc.grid_n);
      for (double val : co.values) {
        try {
          kgs::make_time_grid(sc.T, val);
        } catch (const kgs::Error& e) {
          throw kgs::ConfigError("values: dt " + format_double(val) + ": " + e.what());
        }
        ClassicalScenario row = sc;
        row.dt = val;
        kgs::SeriesEngine engine(make_series_config(row, built, val));
        const kgs::TimeSampledField ref = make_reference(row, built, sc.lambda, val);
        const kgs::TimeSampledField sum = engine.partial_sum(sc.order);
        emit(val, max_diff_sobolev(sum, ref, sc.q),
             kgs::residual(sum, sc.q, sc.lambda, sc.p, sc.dealias));
      }
    } else if (co.param == "order") {
      const BuiltClassical built = build_classical(sc, sc.grid_n);
      ClassicalScenario base = sc;
      base.order = static_cast<int>(
          *std::max_element(co.values.begin(), co.values.end()));
      kgs::SeriesEngine engine(make_series_config(base, built, sc.dt));
      const kgs::TimeSampledField ref = make_reference(sc, built, sc.lambda, sc.dt);
      for (double val : co.values) {
        const kgs::TimeSampledField sum = engine.partial_sum(static_cast<int>(val));
        emit(val, max_diff_sobolev(sum, ref, sc.q),
             kgs::residual(sum, sc.q, sc.lambda, sc.p, sc.dealias));
      }
    } else {  // grid_n
      for (double val : co.values) {
        const BuiltClassical built = build_classical(sc, static_cast<int>(val));
        kgs::SeriesEngine engine(make_series_config(sc, built, sc.dt));
        const kgs::TimeSampledField ref = make_reference(sc, built, sc.lambda, sc.dt);
        const kgs::TimeSampledField sum = engine.partial_sum(sc.order);
        emit(val, max_diff_sobolev(sum, ref, sc.q),
             kgs::residual(sum, sc.q, sc.lambda, sc.p, sc.dealias));
      }
    }
  }

  const auto outdir = resolve_outdir(co.outdir);
  write_text(outdir / "convergence.csv", csv.str());
  std::cout << csv.str();

  if (co.fit) {
    const kgs::LineFit fit = kgs::fit_loglog(fit_x, fit_y, 0.0);
    std::size_t used = 0;
    for (double y : fit_y)
      if (y > 0.0) ++used;
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["mode"] = "convergence-fit";
    j["param"] = co.param;
    j["column"] = fit_column;
    j["points_used"] = used;
    j["slope"] = json_number(fit.slope);
    j["slope_stderr"] = json_number(fit.slope_stderr);
    const std::string text = j.dump(2) + "\n";
    write_text(outdir / "convergence_fit.json", text);
    std::cout << text;
  }
}

void emit_error(const std::string& category, const std::string& message) {
  ordered_json err;
  err["category"] = category;
  err["message"] = message;
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["error"] = err;
  std::cout << j.dump(2) << "\n";
  std::cerr << "error (" << category << "): " << message << "\n";
}

int exit_code_for(const std::string& category) {
  if (category == "divergence") return 3;
  if (category == "truncation") return 4;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-series toolkit for the nonlinear Klein-Gordon field"};
  app.set_version_flag("--version", "kgseries 0.1.0");
  app.require_subcommand(1);

  std::string config_path;
  const auto add_config = [&config_path](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "flat key=value file; command-line flags override it");
  };

  TreesOptions topt;
  auto* trees = app.add_subcommand("trees", "planar tree counts and growth bounds");
  trees->add_option("--p", topt.p, "children per internal vertex")->capture_default_str();
  trees->add_option("--max-order", topt.max_order, "largest order listed")
      ->capture_default_str();
  trees->add_flag("--keys", topt.keys, "also list every planar key per order");
  trees->add_option("--outdir", topt.outdir, "artifact directory");
  add_config(trees);

  ClassicalScenario csc;
  std::string classical_outdir;
  bool reference_only = false;
  auto* classical =
      app.add_subcommand("classical", "truncated series vs a time-stepped reference");
  add_classical_options(classical, csc);
  classical->add_flag("--reference-only", reference_only,
                      "integrate the reference only; skip the series");
  classical->add_option("--outdir", classical_outdir, "artifact directory");
  add_config(classical);

  QuantumScenario qsc;
  std::string quantum_outdir;
  auto* quantum =
      app.add_subcommand("quantum", "graded unitarity and series-identity checks");
  add_quantum_options(quantum, qsc, false);
  quantum->add_option("--outdir", quantum_outdir, "artifact directory");
  add_config(quantum);

  ConvergenceOptions copt;
  ClassicalScenario conv_sc;
  QuantumScenario conv_qs;
  auto* conv = app.add_subcommand("convergence", "one-parameter error sweep");
  conv->add_option("--param", copt.param, "swept key: lambda | dt | dtau | order | grid_n");
  conv->add_option("--values", copt.values, "swept values (comma separated)")
      ->delimiter(',');
  conv->add_flag("--fit", copt.fit, "append a log-log slope fit");
  conv->add_option("--outdir", copt.outdir, "artifact directory");
  add_classical_options(conv, conv_sc);
  add_quantum_options(conv, conv_qs, true);
  add_config(conv);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(trees)) {
      apply_config_file(trees, config_path);
      run_trees(topt);
    } else if (app.got_subcommand(classical)) {
      apply_config_file(classical, config_path);
      run_classical(csc, classical_outdir, reference_only);
    } else if (app.got_subcommand(quantum)) {
      apply_config_file(quantum, config_path);
      run_quantum(qsc, quantum_outdir);
    } else if (app.got_subcommand(conv)) {
      apply_config_file(conv, config_path);
      conv_qs.p = conv_sc.p;
      conv_qs.mass = conv_sc.mass;
      conv_qs.box_L = conv_sc.box_L;
      conv_qs.order = conv_sc.order;
      run_convergence(copt, conv_sc, conv_qs);
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("config", e.what());
    return 2;
  } catch (const kgs::Error& e) {
    emit_error(e.category(), e.what());
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
  return 0;
}
