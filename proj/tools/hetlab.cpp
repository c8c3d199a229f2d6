// hetlab command-line front end. Every subcommand writes into --output-dir and
// leaves a <subcommand>.run.json sidecar with the resolved options.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include <hetlab/common.hpp>
#include <hetlab/core_types.hpp>
#include <hetlab/cycle_map.hpp>
#include <hetlab/io.hpp>
#include <hetlab/manifolds.hpp>
#include <hetlab/ode/averages.hpp>
#include <hetlab/ode/floquet.hpp>
#include <hetlab/ode/systems.hpp>
#include <hetlab/parallel.hpp>
#include <hetlab/polygon.hpp>
#include <hetlab/sternberg.hpp>
#include <hetlab/tangency.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hetlab;

namespace {

constexpr const char* kVersion = HETLAB_VERSION;

struct Common {
  std::string output_dir = "out";
  std::string format = "csv";
};

// ---------------------------------------------------------------------------
// Output helpers

std::string out_path(const Common& c, const std::string& name) { return (fs::path(c.output_dir) / name).string(); }

void prepare_output_dir(const Common& c) {
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec || !fs::is_directory(c.output_dir)) throw InputError("cannot create output directory '" + c.output_dir + "'");
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string(what) + " is required");
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " '" + path + "' does not exist");
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Resolved options of a subcommand, defaults included.
json resolved_options(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string key = opt->get_lnames().front();
    if (key == "help" || key == "version") continue;
    if (opt->get_type_size() == 0) {
      j[key] = opt->count() > 0;
      continue;
    }
    auto res = opt->results();
    if (res.empty()) {
      const std::string def = opt->get_default_str();
      if (def.empty()) {
        j[key] = nullptr;
      } else {
        j[key] = def;
      }
    } else if (res.size() == 1) {
      j[key] = res.front();
    } else {
      j[key] = res;
    }
  }
  return j;
}

void write_sidecar(const Common& c, const CLI::App& sub, const json& extra = json::object()) {
  json j;
  j["subcommand"] = sub.get_name();
  j["version"] = kVersion;
  j["timestamp"] = utc_timestamp();
  j["threads"] = max_threads();
  j["options"] = resolved_options(sub);
  if (!extra.empty()) j["summary"] = extra;
  write_json_file(out_path(c, sub.get_name() + ".run.json"), j);
}

void check_format(const Common& c) {
  if (c.format != "csv" && c.format != "json") throw InputError("format must be csv or json");
}

// CSV text -> JSON array of objects keyed by the header, numbers kept as text
// parsed back to double so the 17-digit values survive.
json csv_to_json(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  std::vector<std::string> header;
  json rows = json::array();
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    return out;
  };
  if (std::getline(is, line)) header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    json row = json::object();
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end != cells[i].c_str() && *end == '\0') {
        row[header[i]] = v;
      } else {
        row[header[i]] = cells[i];
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit_table(const Common& c, const std::string& stem, const std::string& csv) {
  if (c.format == "json") {
    write_json_file(out_path(c, stem + ".json"), csv_to_json(csv));
  } else {
    write_text_file(out_path(c, stem + ".csv"), csv);
  }
}

Side parse_side(const std::string& s) {
  if (s == "plus") return Side::Plus;
  if (s == "minus") return Side::Minus;
  throw InputError("side must be plus or minus");
}

Spacing parse_spacing(const std::string& s) {
  if (s == "uniform") return Spacing::Uniform;
  if (s == "arc") return Spacing::ArcUniform;
  throw InputError("spacing must be uniform or arc");
}

KindFilter parse_kind(const std::string& s) {
  if (s == "all") return KindFilter::All;
  if (s == "enter") return KindFilter::EnterA;
  if (s == "leave") return KindFilter::LeaveA;
  throw InputError("kind must be all, enter or leave");
}

ode::State parse_state(const std::vector<double>& v, int dim) {
  if (static_cast<int>(v.size()) != dim)
    throw InputError("initial condition needs " + std::to_string(dim) + " components");
  ode::State x(dim);
  for (int i = 0; i < dim; ++i) x[i] = v[static_cast<std::size_t>(i)];
  return x;
}

void add_version_flag(CLI::App& sub) {
  sub.add_flag_callback("--version", [] {
    std::cout << "hetlab " << kVersion << "\n";
    throw CLI::Success();
  }, "Print the version and exit");
}

// ---------------------------------------------------------------------------
// Subcommands

struct SpecArgs {
  std::string spec;
};

void cmd_derive(const Common& c, const CLI::App& sub, const SpecArgs& a) {
  require_file(a.spec, "--spec");
  prepare_output_dir(c);
  const CycleSpec spec = load_spec(a.spec);
  const DerivedConstants dc = derive_constants(spec);
  const Polygon poly = polygon_vertices(spec);
  json cj = constants_to_json(dc);
  cj["attractivity"] = to_string(spec.attractivity());
  write_json_file(out_path(c, "constants.json"), cj);
  json pj = polygon_to_json(poly);
  json edges = json::array();
  for (const auto& r : check_collinearity(poly, spec)) {
    edges.push_back({{"edge", r.a + 1}, {"alpha", r.alpha}, {"beta", r.beta}, {"ok", r.ok}});
  }
  pj["edges"] = edges;
  write_json_file(out_path(c, "polygon.json"), pj);
  write_sidecar(c, sub, {{"delta", dc.delta}});
}

struct IterateArgs {
  std::string spec;
  std::size_t n_hits = 60;
  double height = 0.0;
  double log_height = std::numeric_limits<double>::quiet_NaN();
  double angle = 0.0;
  std::string side = "plus";
  double transit_time = 0.0;
};

Itinerary iterate_from(const IterateArgs& a, const CycleSpec& spec) {
  SectionPoint start;
  if (!std::isnan(a.log_height)) {
    start = SectionPoint::on_in_log(0, a.angle, a.log_height, spec.epsilon(), parse_side(a.side));
  } else {
    const double z = a.height > 0.0 ? a.height : 0.5 * spec.epsilon();
    start = SectionPoint::on_in(0, a.angle, z, spec.epsilon(), parse_side(a.side));
  }
  return run_itinerary(spec, start, a.n_hits, ItineraryOptions{a.transit_time});
}

void cmd_iterate(const Common& c, const CLI::App& sub, const IterateArgs& a) {
  require_file(a.spec, "--spec");
  check_format(c);
  prepare_output_dir(c);
  const CycleSpec spec = load_spec(a.spec);
  const Itinerary it = iterate_from(a, spec);
  std::ostringstream os;
  write_itinerary_csv(os, it);
  emit_table(c, "itinerary", os.str());
  write_sidecar(c, sub, {{"hits", it.records.size()}});
}

struct AverageArgs {
  IterateArgs it;
  std::size_t samples = 100;
  std::string spacing = "arc";
  bool stagger = true;
  long long tail_first = -1, tail_last = -1;
};

void cmd_average(const Common& c, const CLI::App& sub, const AverageArgs& a) {
  require_file(a.it.spec, "--spec");
  check_format(c);
  prepare_output_dir(c);
  const CycleSpec spec = load_spec(a.it.spec);
  const Itinerary it = iterate_from(a.it, spec);
  TraceOptions opts;
  opts.samples_per_sojourn = a.samples;
  opts.spacing = parse_spacing(a.spacing);
  opts.stagger = a.stagger;
  const AverageTrace tr = average_trace(it, spec, opts);
  std::ostringstream os;
  write_trace_csv(os, tr);
  emit_table(c, "trace", os.str());
  const Polygon poly = polygon_vertices(spec);
  write_json_file(out_path(c, "polygon.json"), polygon_to_json(poly));
  json summary = {{"samples", tr.samples.size()}};
  if (a.tail_first >= 0 && a.tail_last >= a.tail_first) {
    const auto tail = trace_tail(tr, spec.k(), a.tail_first, a.tail_last);
    summary["tail_points"] = tail.size();
    summary["hausdorff"] = tail.empty() ? json(nullptr) : json(accumulation_distance(tail, poly));
  }
  write_sidecar(c, sub, summary);
}

struct SystemArgs {
  std::string system = "lifted";
  double eps_pert = 0.05;
  double lambda = 0.0;
  std::vector<double> tilde = {1.0, 0.0, 1.5};
  double rtol = 1e-10, atol = 1e-12;

  ode::System make() const {
    ode::SystemParams p;
    p.eps_pert = eps_pert;
    p.lambda = lambda;
    if (tilde.size() != 3) throw InputError("--tilde-coeffs takes three values");
    p.tilde_coeffs = {tilde[0], tilde[1], tilde[2]};
    const auto id = ode::parse_system_id(system);
    if (!id) throw InputError("unknown system '" + system + "'");
    return ode::System(*id, p);
  }
  ode::Controls controls() const {
    ode::Controls ctl;
    ctl.rtol = rtol;
    ctl.atol = atol;
    return ctl;
  }
};

void add_system_options(CLI::App& sub, SystemArgs& s) {
  sub.add_option("--system", s.system,
                 "planar_conservative, planar_bowen, translated, lifted, lifted_perturbed or planar_bowen_tilde")
      ->capture_default_str();
  sub.add_option("--eps-pert", s.eps_pert, "Dissipation parameter")->capture_default_str();
  sub.add_option("--lambda", s.lambda, "Symmetry-breaking parameter")->capture_default_str();
  sub.add_option("--tilde-coeffs", s.tilde, "Polynomial coefficients of the tilde potential")
      ->expected(3)
      ->delimiter(',')
      ->capture_default_str();
  sub.add_option("--rtol", s.rtol, "Relative tolerance")->capture_default_str();
  sub.add_option("--atol", s.atol, "Absolute tolerance")->capture_default_str();
}

struct OdeArgs {
  SystemArgs sys;
  std::string mode = "trajectory";
  std::vector<double> x0;
  double t_max = 100.0;
  double dt_out = 0.1;
  double x_level = 1.0;
};

void cmd_ode(const Common& c, const CLI::App& sub, const OdeArgs& a) {
  check_format(c);
  const ode::System sys = a.sys.make();
  if (a.mode != "trajectory" && a.mode != "average" && a.mode != "orbit")
    throw InputError("mode must be trajectory, average or orbit");
  if (a.mode != "orbit" && !(a.t_max > 0.0 && a.dt_out > 0.0)) throw InputError("--t-max and --dt-out must be positive");
  prepare_output_dir(c);
  if (a.mode == "orbit") {
    if (!sys.is_lifted()) throw InputError("periodic orbits are computed for the lifted systems only");
    ode::PeriodicOrbitOptions opts;
    opts.controls = a.sys.controls();
    const auto orbit = ode::periodic_orbit(sys, a.x_level, opts);
    write_json_file(out_path(c, "orbit.json"), ode::orbit_to_json(orbit));
    write_sidecar(c, sub, {{"period", orbit.period}, {"m_unstable", orbit.m_unstable}});
    return;
  }
  const ode::State x0 = parse_state(a.x0, sys.dim());
  std::ostringstream os;
  if (a.mode == "trajectory") {
    ode::write_path_csv(os, ode::sample_trajectory(sys, x0, a.t_max, a.dt_out, a.sys.controls()));
    emit_table(c, "trajectory", os.str());
  } else {
    ode::write_path_csv(os, ode::ode_time_average(sys, x0, a.t_max, a.dt_out, a.sys.controls()), true);
    emit_table(c, "average", os.str());
  }
  write_sidecar(c, sub);
}

struct ManifoldArgs {
  SystemArgs sys;
  int node = 1;
  std::size_t ring = 256;
  std::size_t grid = 256;
  double eta = 1e-6;
  double offset = 0.1;
  double t_max = 200.0;
};

ManifoldOptions manifold_options(const ManifoldArgs& a) {
  ManifoldOptions o;
  o.ring_size = a.ring;
  o.grid = a.grid;
  o.eta = a.eta;
  o.section_offset = a.offset;
  o.t_max = a.t_max;
  o.controls = a.sys.controls();
  return o;
}

void cmd_manifolds(const Common& c, const CLI::App& sub, const ManifoldArgs& a) {
  if (a.node != 1 && a.node != 2) throw InputError("--node must be 1 or 2");
  const ode::System sys = a.sys.make();
  if (!sys.is_lifted()) throw InputError("manifold curves are extracted for the lifted systems only");
  prepare_output_dir(c);
  const ManifoldOptions opts = manifold_options(a);
  const int from = a.node - 1;
  const auto orbits = lifted_orbits(sys, opts.orbit);
  const ConnectionTraces tr = trace_connection(sys, from, orbits, opts);
  const ManifoldCurve h = h_curve(tr, opts.grid);
  const ManifoldCurve g = g_curve(tr, opts.grid);
  std::ostringstream hs, gs;
  write_curve_csv(hs, h);
  write_curve_csv(gs, g);
  write_text_file(out_path(c, "h_curve.csv"), hs.str());
  write_text_file(out_path(c, "g_curve.csv"), gs.str());
  // delta_a of the node whose block the spiral lives in (the target of h)
  const auto& target = orbits[static_cast<std::size_t>((from + 1) % 2)];
  const double delta_a = target.c / target.e;
  json report;
  report["h"] = curve_summary_json(h);
  report["g"] = curve_summary_json(g);
  report["delta_a"] = delta_a;
  report["epsilon"] = opts.section_offset;
  report["margin"] = class_C_margin(opts.section_offset, delta_a, h.max_value, g.max_value);
  write_json_file(out_path(c, "manifolds.json"), report);
  write_sidecar(c, sub, {{"M_I", h.max_value}, {"M_O", g.max_value}});
}

struct TangencyArgs {
  std::string family = "sine";
  double e = 1.0, delta = 2.0, epsilon = 0.1;
  double h_amp = 1.0, g_amp = 1.0, g_offset = 0.0;
  double lambda_lo = 1e-6, lambda_hi = 0.05;
  std::size_t count = 100;
  std::string kind = "all";
  double kappa = 1e-3;
  ManifoldArgs manifold;
};

void cmd_tangency(const Common& c, const CLI::App& sub, const TangencyArgs& a) {
  if (!(a.lambda_lo > 0.0 && a.lambda_hi > a.lambda_lo)) throw InputError("need 0 < --lambda-lo < --lambda-hi");
  ScanOptions so;
  so.lambda_lo = a.lambda_lo;
  so.lambda_hi = a.lambda_hi;
  so.count = a.count;
  so.kind = parse_kind(a.kind);
  so.kappa = a.kappa;
  PassageParams pp{a.e, a.delta, a.epsilon};
  TangencyScanResult res;
  if (a.family == "sine") {
    prepare_output_dir(c);
    res = tangency_scan(SineFamily(a.h_amp, a.g_amp, a.g_offset), pp, so);
  } else if (a.family == "ode") {
    if (a.manifold.node != 1 && a.manifold.node != 2) throw InputError("--node must be 1 or 2");
    prepare_output_dir(c);
    const ManifoldOptions mo = manifold_options(a.manifold);
    ode::SystemParams base;
    base.eps_pert = a.manifold.sys.eps_pert;
    const int from = a.manifold.node - 1;
    // passage constants measured on the orbit that owns the spiral
    const ode::System sys0(ode::SystemId::LiftedPerturbed, base);
    const auto orbit = ode::periodic_orbit(sys0, node_level((from + 1) % 2), mo.orbit);
    pp = PassageParams{orbit.e, orbit.c / orbit.e, mo.section_offset};
    const CachedCurveFamily fam(base, from, a.lambda_lo, a.lambda_hi, mo);
    res = tangency_scan(fam, pp, so);
  } else {
    throw InputError("family must be sine or ode");
  }
  json j = scan_to_json(res);
  j["passage"] = {{"e", pp.e}, {"delta", pp.delta}, {"epsilon", pp.epsilon}};
  write_json_file(out_path(c, "tangency.json"), j);
  write_sidecar(c, sub, {{"tangencies", res.tangencies.size()}});
}

struct SternbergArgs {
  double e = std::sqrt(2.0), c = 2.0;
  int k = 2;
  int node = 1;
  double rel_tol = 1e-12;
};

void cmd_sternberg(const Common& cm, const CLI::App& sub, const SternbergArgs& a) {
  if (!(a.e > 0.0 && a.c > 0.0)) throw InputError("--e and --c must be positive");
  if (a.k < 1) throw InputError("--k must be at least 1");
  prepare_output_dir(cm);
  const auto rep = resonance_check(a.e, a.c, a.k, a.node - 1, a.rel_tol);
  write_json_file(out_path(cm, "sternberg.json"), sternberg_to_json(rep));
  write_sidecar(cm, sub, {{"linearizable", rep.linearizable()}, {"alpha", rep.alpha}});
}

// ---------------------------------------------------------------------------
// Sweeps: independent jobs on the thread pool, results stored by job index.

struct SweepArgs {
  std::string task = "ode-average";
  std::uint64_t seed = 1;
  std::size_t samples = 8;
  std::vector<double> eps_list = {0.05};
  std::vector<double> lambda_list = {0.0};
  double t_max = 500.0;
  ManifoldArgs manifold;
};

void sweep_ode_average(const Common& c, const SweepArgs& a) {
  struct Job {
    double eps, lambda;
    std::size_t index;
    ode::State x0;
  };
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> ux(-0.9, 0.9);
  std::vector<Job> jobs;
  for (double eps : a.eps_list) {
    for (double lam : a.lambda_list) {
      for (std::size_t i = 0; i < a.samples; ++i) {
        ode::State x0(3);
        x0 << ux(rng), 0.9, 0.0;
        jobs.push_back({eps, lam, i, x0});
      }
    }
  }
  std::vector<ode::State> out(jobs.size());
  for_each_index(Exec::Parallel, jobs.size(), [&](std::size_t i) {
    ode::SystemParams p;
    p.eps_pert = jobs[i].eps;
    p.lambda = jobs[i].lambda;
    const ode::System sys(p.lambda == 0.0 ? ode::SystemId::Lifted : ode::SystemId::LiftedPerturbed, p);
    const auto path = ode::ode_time_average(sys, jobs[i].x0, a.t_max, a.t_max, a.manifold.sys.controls());
    out[i] = path.values.back();
  });
  std::ostringstream os;
  os << "eps_pert,lambda,index,x0,R_x,R_z1,R_z2\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    os << fmt17(jobs[i].eps) << ',' << fmt17(jobs[i].lambda) << ',' << jobs[i].index << ',' << fmt17(jobs[i].x0[0])
       << ',' << fmt17(out[i][0]) << ',' << fmt17(out[i][1]) << ',' << fmt17(out[i][2]) << '\n';
  }
  emit_table(c, "sweep", os.str());
}

void sweep_ratio_law(const Common& c, const SweepArgs& a) {
  struct Job {
    std::vector<NodeSpec> nodes;
    double z;
  };
  std::mt19937_64 rng(a.seed);
  std::uniform_int_distribution<int> uk(2, 4);
  std::uniform_real_distribution<double> ue(0.5, 2.0), uc(0.5, 3.0), uz(1e-6, 0.1);
  std::vector<Job> jobs;
  while (jobs.size() < a.samples) {
    const int k = uk(rng);
    std::vector<NodeSpec> nodes(static_cast<std::size_t>(k));
    double delta = 1.0;
    for (int i = 0; i < k; ++i) {
      auto& n = nodes[static_cast<std::size_t>(i)];
      n.e = ue(rng);
      n.c = uc(rng);
      n.xbar = Vec3(std::cos(kTwoPi * i / k), std::sin(kTwoPi * i / k), 0.0);
      delta *= n.c / n.e;
    }
    if (delta <= 1.0) continue;
    jobs.push_back({nodes, uz(rng) * 0.1});
  }
  std::vector<double> err(jobs.size());
  std::vector<double> delta(jobs.size());
  for_each_index(Exec::Parallel, jobs.size(), [&](std::size_t i) {
    const CycleSpec spec = CycleSpec::validated(jobs[i].nodes, 0.1);
    delta[i] = derive_constants(spec).delta;
    const Itinerary it = run_itinerary(spec, SectionPoint::on_in(0, 0.0, jobs[i].z, 0.1), 40);
    double worst = 0.0;
    for (std::size_t r = 0; r + 1 < it.records.size(); ++r) {
      const double expect = spec.node(it.records[r].node).c / spec.node(it.records[r + 1].node).e;
      worst = std::max(worst, std::abs(sojourn_ratio(it, r) / expect - 1.0));
    }
    err[i] = worst;
  });
  std::ostringstream os;
  os << "index,k,delta,max_rel_error\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    os << i << ',' << jobs[i].nodes.size() << ',' << fmt17(delta[i]) << ',' << fmt17(err[i]) << '\n';
  }
  emit_table(c, "sweep", os.str());
}

void sweep_manifold_max(const Common& c, const SweepArgs& a) {
  if (a.manifold.node != 1 && a.manifold.node != 2) throw InputError("--node must be 1 or 2");
  std::vector<double> lambdas = a.lambda_list;
  std::sort(lambdas.begin(), lambdas.end());
  ManifoldOptions mo = manifold_options(a.manifold);
  mo.exec = Exec::Serial;  // the sweep itself is the parallel level
  struct Row {
    double mi = 0.0, mo = 0.0;
    std::string error;
  };
  std::vector<Row> rows(lambdas.size());
  for_each_index(Exec::Parallel, lambdas.size(), [&](std::size_t i) {
    ode::SystemParams p;
    p.eps_pert = a.manifold.sys.eps_pert;
    p.lambda = lambdas[i];
    const ode::System sys(ode::SystemId::LiftedPerturbed, p);
    try {
      const auto tr = trace_connection(sys, a.manifold.node - 1, mo);
      rows[i].mi = h_curve(tr, mo.grid).max_value;
      rows[i].mo = g_curve(tr, mo.grid).max_value;
    } catch (const NumericalError& e) {
      rows[i].error = e.what();
    }
  });
  std::ostringstream os;
  os << "lambda,M_I,M_O,status\n";
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const bool ok = rows[i].error.empty();
    os << fmt17(lambdas[i]) << ',' << (ok ? fmt17(rows[i].mi) : "nan") << ',' << (ok ? fmt17(rows[i].mo) : "nan")
       << ',' << (ok ? "ok" : "incomplete") << '\n';
  }
  emit_table(c, "sweep", os.str());
}

void cmd_sweep(const Common& c, const CLI::App& sub, const SweepArgs& a) {
  check_format(c);
  if (a.samples == 0) throw InputError("--samples must be positive");
  if (a.task == "ode-average") {
    if (!(a.t_max > 0.0)) throw InputError("--t-max must be positive");
    prepare_output_dir(c);
    sweep_ode_average(c, a);
  } else if (a.task == "ratio-law") {
    prepare_output_dir(c);
    sweep_ratio_law(c, a);
  } else if (a.task == "manifold-max") {
    prepare_output_dir(c);
    sweep_manifold_max(c, a);
  } else {
    throw InputError("task must be ode-average, ratio-law or manifold-max");
  }
  write_sidecar(c, sub);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetlab: heteroclinic cycle toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("hetlab ") + kVersion);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_format) {
    sub->add_option("--output-dir", common.output_dir, "Directory for all outputs")->capture_default_str();
    if (with_format) sub->add_option("--format", common.format, "csv or json")->capture_default_str();
    add_version_flag(*sub);
  };

  SpecArgs derive_args;
  auto* derive = app.add_subcommand("derive", "Derived constants and polygon vertices of a cycle spec");
  derive->add_option("--spec", derive_args.spec, "Cycle spec JSON file");
  add_common(derive, false);

  auto add_iterate_options = [](CLI::App* sub, IterateArgs& a) {
    sub->add_option("--spec", a.spec, "Cycle spec JSON file");
    sub->add_option("--n-hits", a.n_hits, "Number of wall hits")->capture_default_str();
    sub->add_option("--height", a.height, "Start height z on In(P_1); default eps/2");
    sub->add_option("--log-height", a.log_height, "Start log-height ln(z/eps); overrides --height");
    sub->add_option("--angle", a.angle, "Start angle on In(P_1)")->capture_default_str();
    sub->add_option("--side", a.side, "plus or minus")->capture_default_str();
    sub->add_option("--transit-time", a.transit_time, "Constant time between blocks")->capture_default_str();
  };

  IterateArgs iterate_args;
  auto* iterate = app.add_subcommand("iterate", "Itinerary of the return model");
  add_iterate_options(iterate, iterate_args);
  add_common(iterate, true);

  AverageArgs average_args;
  auto* average = app.add_subcommand("average", "Running time average under the return model");
  add_iterate_options(average, average_args.it);
  average->add_option("--samples-per-sojourn", average_args.samples, "Intermediate samples per sojourn")
      ->capture_default_str();
  average->add_option("--spacing", average_args.spacing, "uniform or arc")->capture_default_str();
  average->add_option("--stagger", average_args.stagger, "Golden-ratio offsets between sojourns")
      ->capture_default_str();
  average->add_option("--tail-first", average_args.tail_first, "First turn of the tail to compare with the polygon");
  average->add_option("--tail-last", average_args.tail_last, "Last turn of the tail");
  add_common(average, true);

  OdeArgs ode_args;
  auto* ode_cmd = app.add_subcommand("ode", "Integrate one of the example vector fields");
  add_system_options(*ode_cmd, ode_args.sys);
  ode_cmd->add_option("--mode", ode_args.mode, "trajectory, average or orbit")->capture_default_str();
  ode_cmd->add_option("--x0", ode_args.x0, "Initial condition")->expected(2, 3)->delimiter(',');
  ode_cmd->add_option("--t-max", ode_args.t_max, "Final time")->capture_default_str();
  ode_cmd->add_option("--dt-out", ode_args.dt_out, "Output spacing")->capture_default_str();
  ode_cmd->add_option("--x-level", ode_args.x_level, "x of the periodic orbit (orbit mode)")->capture_default_str();
  add_common(ode_cmd, true);

  auto add_manifold_options = [](CLI::App* sub, ManifoldArgs& m) {
    sub->add_option("--node", m.node, "Source node a (1 or 2); curves live on In(P_{a+1}) and Out(P_a)")
        ->capture_default_str();
    sub->add_option("--ring-size", m.ring, "Seeds per ring")->capture_default_str();
    sub->add_option("--grid", m.grid, "Curve samples over one turn")->capture_default_str();
    sub->add_option("--eta", m.eta, "Seed displacement")->capture_default_str();
    sub->add_option("--section-offset", m.offset, "Distance of the section planes from the orbits")
        ->capture_default_str();
    sub->add_option("--seed-t-max", m.t_max, "Integration limit per seed")->capture_default_str();
  };

  ManifoldArgs manifold_args;
  manifold_args.sys.system = "lifted_perturbed";
  auto* manifolds = app.add_subcommand("manifolds", "Extract the h and g curves of the lifted system");
  add_system_options(*manifolds, manifold_args.sys);
  add_manifold_options(manifolds, manifold_args);
  add_common(manifolds, false);

  TangencyArgs tangency_args;
  auto* tangency = app.add_subcommand("tangency", "Scan lambda for tangencies of the spiral with g");
  tangency->add_option("--family", tangency_args.family, "sine or ode")->capture_default_str();
  tangency->add_option("--e", tangency_args.e, "Expanding exponent (sine family)")->capture_default_str();
  tangency->add_option("--delta", tangency_args.delta, "delta_a = c/e (sine family)")->capture_default_str();
  tangency->add_option("--epsilon", tangency_args.epsilon, "Block size (sine family)")->capture_default_str();
  tangency->add_option("--h-amp", tangency_args.h_amp, "h = lambda h_amp sin(theta)")->capture_default_str();
  tangency->add_option("--g-amp", tangency_args.g_amp, "g = 1 + g_offset + lambda g_amp sin(phi)")
      ->capture_default_str();
  tangency->add_option("--g-offset", tangency_args.g_offset, "Constant shift of g")->capture_default_str();
  tangency->add_option("--lambda-lo", tangency_args.lambda_lo, "Lower end of the scan")->capture_default_str();
  tangency->add_option("--lambda-hi", tangency_args.lambda_hi, "Upper end of the scan")->capture_default_str();
  tangency->add_option("--count", tangency_args.count, "Stop after this many tangencies")->capture_default_str();
  tangency->add_option("--kind", tangency_args.kind, "all, enter or leave")->capture_default_str();
  tangency->add_option("--kappa", tangency_args.kappa, "Relative lambda offset for root counts")
      ->capture_default_str();
  tangency->add_option("--eps-pert", tangency_args.manifold.sys.eps_pert, "Dissipation (ode family)")
      ->capture_default_str();
  add_manifold_options(tangency, tangency_args.manifold);
  add_common(tangency, false);

  SternbergArgs sternberg_args;
  auto* sternberg = app.add_subcommand("sternberg", "Sternberg non-resonance check for one node");
  sternberg->add_option("--e", sternberg_args.e, "Expanding exponent")->capture_default_str();
  sternberg->add_option("--c", sternberg_args.c, "Contracting exponent")->capture_default_str();
  sternberg->add_option("--k", sternberg_args.k, "Required smoothness C^k")->capture_default_str();
  sternberg->add_option("--node", sternberg_args.node, "Node label for the report")->capture_default_str();
  sternberg->add_option("--rel-tol", sternberg_args.rel_tol, "Relative tolerance for equality")
      ->capture_default_str();
  add_common(sternberg, false);

  SweepArgs sweep_args;
  sweep_args.manifold.sys.system = "lifted_perturbed";
  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps on the thread pool");
  sweep->add_option("--task", sweep_args.task, "ode-average, ratio-law or manifold-max")->capture_default_str();
  sweep->add_option("--seed", sweep_args.seed, "Seed for randomized sweeps")->capture_default_str();
  sweep->add_option("--samples", sweep_args.samples, "Samples per parameter point")->capture_default_str();
  sweep->add_option("--eps-list", sweep_args.eps_list, "Values of eps_pert")->capture_default_str();
  sweep->add_option("--lambda-list", sweep_args.lambda_list, "Values of lambda")->capture_default_str();
  sweep->add_option("--t-max", sweep_args.t_max, "Averaging horizon (ode-average)")->capture_default_str();
  sweep->add_option("--eps-pert", sweep_args.manifold.sys.eps_pert, "Dissipation (manifold-max)")
      ->capture_default_str();
  add_manifold_options(sweep, sweep_args.manifold);
  add_common(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*derive) cmd_derive(common, *derive, derive_args);
    if (*iterate) cmd_iterate(common, *iterate, iterate_args);
    if (*average) cmd_average(common, *average, average_args);
    if (*ode_cmd) cmd_ode(common, *ode_cmd, ode_args);
    if (*manifolds) cmd_manifolds(common, *manifolds, manifold_args);
    if (*tangency) cmd_tangency(common, *tangency, tangency_args);
    if (*sternberg) cmd_sternberg(common, *sternberg, sternberg_args);
    if (*sweep) cmd_sweep(common, *sweep, sweep_args);
  } catch (const InputError& e) {
    std::cerr << "hetlab: input error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "hetlab: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "hetlab: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
