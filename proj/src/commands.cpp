#include "vacuum/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "vacuum/errors.hpp"
#include "vacuum/identities.hpp"

namespace vacuum {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

json fit_json(const DecayFit& fit) {
  return json{{"delta", fit.delta},         {"amplitude", fit.amplitude}, {"r_squared", fit.r_squared},
              {"t_lo", fit.t_lo},           {"t_hi", fit.t_hi},           {"samples", fit.samples}};
}

std::vector<double> column(const RunResult& r, const std::function<double(const Snapshot&)>& f) {
  std::vector<double> out;
  out.reserve(r.snapshots.size());
  for (const auto& s : r.snapshots) out.push_back(f(s));
  return out;
}

RunConfig with_grid(const RunConfig& base, int n_cells) {
  RunConfig c = base;
  c.grid = Grid1D(base.params, n_cells, base.grid.spacing());
  c.dt = 0.0;
  c.output_every = 0;
  return c;
}

}  // namespace

std::string format_double(double x) {
  if (x == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::vector<std::string> series_columns() {
  std::vector<std::string> cols{"t", "E_total"};
  for (const auto& [m, i] : energy_indices()) cols.push_back("E_" + std::to_string(m) + std::to_string(i));
  for (const char* c : {"D_total", "gamma_boundary", "max_abs_v", "mass_rel_err"}) cols.emplace_back(c);
  return cols;
}

std::string series_csv(const RunResult& result) {
  std::ostringstream out;
  const auto cols = series_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (const auto& s : result.snapshots) {
    out << format_double(s.state.time) << ',' << format_double(s.energy.e_total);
    for (const auto& entry : s.energy.entries) out << ',' << format_double(entry.e());
    out << ',' << format_double(s.energy.d_total) << ',' << format_double(s.boundary) << ','
        << format_double(max_abs(s.state.vel)) << ',' << format_double(s.mass_rel_err) << '\n';
  }
  return out.str();
}

unsigned sweep_threads() {
  unsigned cap = 0;
  if (const char* env = std::getenv("VEL_NUM_THREADS")) {
    const std::string_view s(env);
    unsigned v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) cap = v;
  }
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(sweep_threads(), count);
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) {
      try {
        task(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) {
          try {
            task(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  // Lowest failing index wins so the reported error does not depend on scheduling.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SimulateOutput simulate(const ExperimentSpec& spec) {
  const RunConfig& cfg = spec.run_config;
  SimulateOutput out;
  out.result = run(cfg);
  const auto& snaps = out.result.snapshots;
  const auto& last = snaps.back();

  json summary;
  summary["schema"] = "vacflow.summary/1";
  summary["name"] = spec.name;
  summary["model"] = to_string(cfg.model);
  summary["params"] = {{"gamma", cfg.params.gamma}, {"g", cfg.params.g}, {"M", cfg.params.total_mass},
                       {"nu", cfg.params.nu},       {"hbar", cfg.params.hbar}, {"iota", cfg.params.iota}};
  summary["grid"] = {{"n_cells", cfg.grid.n_cells()}, {"spacing", to_string(cfg.grid.spacing())}};
  summary["initial"] = {{"family", to_string(cfg.init.family)},
                        {"amplitude", cfg.init.amplitude},
                        {"mode", cfg.init.mode},
                        {"vel_amplitude", cfg.init.vel_amplitude}};
  summary["stepping"] = {{"dt", out.result.dt},
                         {"output_every", out.result.output_every},
                         {"records", snaps.size()},
                         {"t_final", cfg.t_final}};
  summary["final"] = {{"t", last.state.time},
                      {"E_total", last.energy.e_total},
                      {"D_total", last.energy.d_total},
                      {"gamma_boundary", last.boundary},
                      {"max_abs_v", max_abs(last.state.vel)},
                      {"mass_rel_err", last.mass_rel_err}};
  summary["decay_fit"] = nullptr;
  summary["final_ratios"] = nullptr;
  summary["window_ratios"] = nullptr;

  const double t_lo = spec.fit_t_lo();
  const double t_hi = spec.fit_t_hi();
  std::optional<DecayFit> fit;
  if (spec.analyses.decay_fit) {
    const auto t = column(out.result, [](const Snapshot& s) { return s.state.time; });
    const auto e = column(out.result, [](const Snapshot& s) { return s.energy.e_total; });
    try {
      fit = fit_decay(t, e, t_lo, t_hi);
      summary["decay_fit"] = fit_json(*fit);
    } catch (const DomainError& err) {
      // Zero data has nothing to fit; report why instead of failing the run.
      summary["decay_fit_error"] = err.what();
    }
  }
  const double e0 = snaps.front().energy.e_total;
  if (spec.analyses.pointwise_bounds && fit && e0 > 0.0) {
    const auto& grid = cfg.grid;
    const auto fin = pointwise_bound_report(cfg.params, grid, last.state, *fit, e0);
    summary["final_ratios"] = {{"density", fin.density}, {"velocity", fin.velocity},
                               {"boundary", fin.boundary}, {"scale", fin.scale}};
    double dmin = INFINITY, dmax = 0.0, vmax = 0.0, bmax = 0.0;
    for (const auto& s : snaps) {
      if (s.state.time < t_lo || s.state.time > t_hi) continue;
      const auto r = pointwise_bound_report(cfg.params, grid, s.state, *fit, e0);
      dmin = std::min(dmin, r.density);
      dmax = std::max(dmax, r.density);
      vmax = std::max(vmax, r.velocity);
      bmax = std::max(bmax, r.boundary);
    }
    summary["window_ratios"] = {{"t_lo", t_lo},          {"t_hi", t_hi},         {"density_min", dmin},
                                {"density_max", dmax},   {"velocity_max", vmax}, {"boundary_max", bmax}};
  }
  out.summary = std::move(summary);
  return out;
}

int cmd_simulate(const ExperimentSpec& spec, bool quiet) {
  const auto out = simulate(spec);
  ensure_dir(spec.output_dir);
  write_text(spec.output_dir / "series.csv", series_csv(out.result));
  write_text(spec.output_dir / "summary.json", out.summary.dump(2) + "\n");
  if (spec.svg) write_text(spec.output_dir / "energy.svg", energy_svg(out.result));
  if (!quiet) {
    std::cout << "simulate: " << out.result.snapshots.size() << " records, dt = " << out.result.dt
              << ", final E_total = " << out.summary["final"]["E_total"].get<double>() << "\n";
    if (!out.summary["decay_fit"].is_null())
      std::cout << "  decay fit: delta = " << out.summary["decay_fit"]["delta"].get<double>()
                << ", R^2 = " << out.summary["decay_fit"]["r_squared"].get<double>() << "\n";
    std::cout << "  wrote " << (spec.output_dir / "series.csv").string() << "\n";
  }
  if (spec.analyses.darcy_compare) cmd_darcy_compare(spec, quiet);
  if (spec.analyses.convergence_levels >= 2) cmd_convergence(spec, quiet);
  return kExitOk;
}

json decay_fit_from_csv(const fs::path& series, double t_lo, double t_hi) {
  std::ifstream in(series);
  if (!in) throw DomainError("cannot read series file " + series.string());
  std::string line;
  if (!std::getline(in, line)) throw DomainError("series file is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto find = [&header](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DomainError("series file lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t tc = find("t");
  const std::size_t ec = find("E_total");
  std::vector<double> t, e;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw DomainError("ragged row in series file");
    t.push_back(std::stod(cells[tc]));
    e.push_back(std::stod(cells[ec]));
  }
  if (t.empty()) throw DomainError("series file has no rows");
  const double horizon = t.back();
  const double lo = t_lo >= 0.0 ? t_lo : 0.25 * horizon;
  const double hi = t_hi >= 0.0 ? t_hi : 0.9 * horizon;
  json j = fit_json(fit_decay(t, e, lo, hi));
  j["schema"] = "vacflow.decay_fit/1";
  j["series"] = series.filename().string();
  return j;
}

int cmd_decay_fit(const fs::path& series, double t_lo, double t_hi, const fs::path& out_dir, bool quiet) {
  const json j = decay_fit_from_csv(series, t_lo, t_hi);
  ensure_dir(out_dir);
  write_text(out_dir / "decay_fit.json", j.dump(2) + "\n");
  if (!quiet)
    std::cout << "decay-fit: delta = " << j["delta"].get<double>() << ", C = " << j["amplitude"].get<double>()
              << ", R^2 = " << j["r_squared"].get<double>() << "\n";
  return kExitOk;
}

json identity_report(const IdentitySettings& settings, std::uint64_t seed) {
  json rows = json::array();
  json maxima = json::object();
  bool exact_ok = true;
  for (int dim : settings.dims) {
    double jac_max = 0.0, adj_max = 0.0, nab_max = 0.0, curl_max = 0.0;
    double order_min = INFINITY, order_max = -INFINITY;
    std::vector<json> dim_rows(static_cast<std::size_t>(settings.samples));
    parallel_for(dim_rows.size(), [&](std::size_t k) {
      const std::uint64_t sample_seed = seed * 1'000'003ULL + 1000ULL * dim + k;
      const FlowSample s = make_flow_sample(dim, sample_seed, settings.points_per_dim);
      const auto jac = verify_jacobian_expansion(s);
      const auto nab = verify_nab_identities(s, settings.dt_probe);
      const double order = measure_nabt_order(s, settings.dt_probe);
      const double curl = verify_curl_transport(s, settings.horizon, 0, sample_seed + 17);
      dim_rows[k] = json{{"dim", dim},
                         {"sample_seed", sample_seed},
                         {"max_grad_omega", max_displacement_gradient(s)},
                         {"seam_mismatch", seam_mismatch(s)},
                         {"jacobian_expansion", jac.expansion},
                         {"adjugate", jac.adjugate},
                         {"nab", nab.nab},
                         {"nabt", nab.nabt},
                         {"nabt_order", order},
                         {"curl_transport", curl}};
    });
    for (auto& row : dim_rows) {
      jac_max = std::max(jac_max, row["jacobian_expansion"].get<double>());
      adj_max = std::max(adj_max, row["adjugate"].get<double>());
      nab_max = std::max(nab_max, row["nab"].get<double>());
      curl_max = std::max(curl_max, row["curl_transport"].get<double>());
      order_min = std::min(order_min, row["nabt_order"].get<double>());
      order_max = std::max(order_max, row["nabt_order"].get<double>());
      rows.push_back(std::move(row));
    }
    const bool ok = jac_max <= kIdentityTolerance && adj_max <= kIdentityTolerance && nab_max <= kIdentityTolerance;
    exact_ok = exact_ok && ok;
    maxima[std::to_string(dim)] = {{"jacobian_expansion", jac_max}, {"adjugate", adj_max},
                                   {"nab", nab_max},                {"curl_transport", curl_max},
                                   {"nabt_order_min", order_min},   {"nabt_order_max", order_max},
                                   {"exact_pass", ok}};
  }
  return json{{"schema", "vacflow.identities/1"},
              {"seed", seed},
              {"tolerance", kIdentityTolerance},
              {"settings",
               {{"dims", settings.dims},
                {"samples", settings.samples},
                {"points_per_dim", settings.points_per_dim},
                {"dt_probe", settings.dt_probe},
                {"horizon", settings.horizon}}},
              {"rows", rows},
              {"maxima", maxima},
              {"pass", exact_ok}};
}

int cmd_verify_identities(const IdentitySettings& settings, std::uint64_t seed, const fs::path& out_dir,
                          bool quiet) {
  const json report = identity_report(settings, seed);
  ensure_dir(out_dir);
  write_text(out_dir / "identities.json", report.dump(2) + "\n");
  if (!quiet) {
    for (const auto& [dim, m] : report["maxima"].items())
      std::cout << "n=" << dim << ": jacobian " << m["jacobian_expansion"].get<double>() << ", nab "
                << m["nab"].get<double>() << ", nabt order [" << m["nabt_order_min"].get<double>() << ", "
                << m["nabt_order_max"].get<double>() << "], curl " << m["curl_transport"].get<double>() << "\n";
  }
  if (!report["pass"].get<bool>())
    throw AssertionFailure("identity residual exceeds tolerance " + format_double(kIdentityTolerance));
  return kExitOk;
}

json convergence_report(const ExperimentSpec& spec, int levels) {
  if (levels < 2) throw DomainError("convergence needs at least 2 levels");
  const RunConfig& base = spec.run_config;
  std::vector<RunConfig> configs;
  for (int k = 0; k < levels; ++k) configs.push_back(with_grid(base, base.grid.n_cells() << k));
  std::vector<RunResult> results(configs.size());
  parallel_for(configs.size(), [&](std::size_t k) { results[k] = run(configs[k]); });

  struct Final {
    std::vector<double> omega, vel, y;
    double e_total, boundary, mass;
  };
  std::vector<Final> finals;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& s = results[k].snapshots.back();
    const auto y = configs[k].grid.nodes();
    finals.push_back({s.state.omega, s.state.vel, {y.begin(), y.end()}, s.energy.e_total, s.boundary,
                      s.mass_rel_err});
  }

  const double hbar = base.params.hbar;
  // Difference of level a and b on the nodes of the coarser level a.
  const auto node_diff = [&](std::size_t a, std::size_t b, bool vel, bool interior) {
    const std::size_t stride = std::size_t{1} << (b - a);
    double m = 0.0;
    for (std::size_t j = 0; j < finals[a].y.size(); ++j) {
      if (interior && finals[a].y[j] > 0.75 * hbar) continue;
      const double fa = vel ? finals[a].vel[j] : finals[a].omega[j];
      const double fb = vel ? finals[b].vel[j * stride] : finals[b].omega[j * stride];
      m = std::max(m, std::abs(fa - fb));
    }
    return m;
  };
  using Metric = std::function<double(std::size_t, std::size_t)>;
  const std::vector<std::pair<std::string, Metric>> metrics{
      {"omega_inf", [&](std::size_t a, std::size_t b) { return node_diff(a, b, false, false); }},
      {"omega_interior_inf", [&](std::size_t a, std::size_t b) { return node_diff(a, b, false, true); }},
      {"vel_inf", [&](std::size_t a, std::size_t b) { return node_diff(a, b, true, false); }},
      {"E_total", [&](std::size_t a, std::size_t b) { return std::abs(finals[a].e_total - finals[b].e_total); }},
      {"gamma_boundary",
       [&](std::size_t a, std::size_t b) { return std::abs(finals[a].boundary - finals[b].boundary); }},
  };

  json quantities = json::object();
  const std::size_t finest = finals.size() - 1;
  for (const auto& [name, metric] : metrics) {
    std::vector<double> diffs, vs_finest, orders;
    for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
      diffs.push_back(metric(k, k + 1));
      vs_finest.push_back(metric(k, finest));
    }
    for (std::size_t k = 0; k + 1 < diffs.size(); ++k) orders.push_back(std::log2(diffs[k] / diffs[k + 1]));
    quantities[name] = {{"differences", diffs}, {"errors_vs_finest", vs_finest}, {"observed_orders", orders}};
  }
  // Mass error has an exact reference (M).
  {
    std::vector<double> errs, orders;
    for (const auto& f : finals) errs.push_back(f.mass);
    for (std::size_t k = 0; k + 1 < errs.size(); ++k) orders.push_back(std::log2(errs[k] / errs[k + 1]));
    quantities["mass_rel_err"] = {{"errors", errs}, {"observed_orders", orders}};
  }

  json lv = json::array();
  for (std::size_t k = 0; k < configs.size(); ++k)
    lv.push_back({{"n_cells", configs[k].grid.n_cells()},
                  {"dt", results[k].dt},
                  {"records", results[k].snapshots.size()}});
  const auto& interior = quantities["omega_interior_inf"]["observed_orders"];
  return json{{"schema", "vacflow.convergence/1"},
              {"name", spec.name},
              {"t_final", base.t_final},
              {"levels", lv},
              {"quantities", quantities},
              {"interior_order", interior.empty() ? json(nullptr) : interior.back()}};
}

int cmd_convergence(const ExperimentSpec& spec, bool quiet) {
  const int levels = spec.analyses.convergence_levels > 0 ? spec.analyses.convergence_levels : 3;
  const json report = convergence_report(spec, levels);
  ensure_dir(spec.output_dir);
  write_text(spec.output_dir / "convergence.json", report.dump(2) + "\n");
  if (!quiet) {
    for (const auto& [name, q] : report["quantities"].items())
      std::cout << name << ": orders " << q["observed_orders"].dump() << "\n";
  }
  return kExitOk;
}

DarcyComparison darcy_compare(const ExperimentSpec& spec) {
  RunConfig euler = with_grid(spec.run_config, spec.run_config.grid.n_cells());
  euler.model = Model::EulerDamped;
  RunConfig darcy = euler;
  darcy.model = Model::Darcy;
  std::vector<RunResult> results(2);
  const RunConfig* cfgs[2] = {&euler, &darcy};
  parallel_for(2, [&](std::size_t k) { results[k] = run(*cfgs[k]); });

  DarcyComparison cmp;
  const auto& es = results[0].snapshots;
  const auto& ds = results[1].snapshots;
  std::size_t j = 0;
  for (const auto& e : es) {
    while (j < ds.size() && ds[j].state.time < e.state.time - 1e-9) ++j;
    if (j == ds.size()) break;
    if (std::abs(ds[j].state.time - e.state.time) > 1e-9) continue;
    double diff = 0.0;
    for (std::size_t n = 0; n < e.state.omega.size(); ++n)
      diff = std::max(diff, std::abs(e.state.omega[n] - ds[j].state.omega[n]));
    cmp.t.push_back(e.state.time);
    cmp.diff_inf.push_back(diff);
    cmp.e_euler.push_back(e.energy.e_total);
    cmp.e_darcy.push_back(ds[j].energy.e_total);
  }
  return cmp;
}

int cmd_darcy_compare(const ExperimentSpec& spec, bool quiet) {
  const auto cmp = darcy_compare(spec);
  ensure_dir(spec.output_dir);
  std::ostringstream csv;
  csv << "t,diff_inf,E_euler,E_darcy\n";
  for (std::size_t k = 0; k < cmp.t.size(); ++k)
    csv << format_double(cmp.t[k]) << ',' << format_double(cmp.diff_inf[k]) << ',' << format_double(cmp.e_euler[k])
        << ',' << format_double(cmp.e_darcy[k]) << '\n';
  write_text(spec.output_dir / "darcy_compare.csv", csv.str());

  const auto at = [&cmp](double t) -> json {
    for (std::size_t k = 0; k < cmp.t.size(); ++k)
      if (std::abs(cmp.t[k] - t) < 1e-9) return cmp.diff_inf[k];
    return nullptr;
  };
  json j{{"schema", "vacflow.darcy_compare/1"},
         {"name", spec.name},
         {"records", cmp.t.size()},
         {"diff_at_1", at(1.0)},
         {"diff_at_20", at(20.0)},
         {"diff_final", cmp.diff_inf.empty() ? json(nullptr) : json(cmp.diff_inf.back())}};
  j["ratio_20_over_1"] = (j["diff_at_1"].is_number() && j["diff_at_20"].is_number() &&
                          j["diff_at_1"].get<double>() > 0.0)
                             ? json(j["diff_at_20"].get<double>() / j["diff_at_1"].get<double>())
                             : json(nullptr);
  write_text(spec.output_dir / "darcy_compare.json", j.dump(2) + "\n");
  if (!quiet) std::cout << "darcy-compare: " << j.dump() << "\n";
  return kExitOk;
}

std::string energy_svg(const RunResult& result) {
  constexpr double width = 640, height = 400, margin = 50;
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : result.snapshots)
    if (s.energy.e_total > 0.0) pts.emplace_back(s.state.time, std::log10(s.energy.e_total));
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (pts.size() >= 2) {
    double t0 = pts.front().first, t1 = pts.back().first;
    double lo = pts.front().second, hi = lo;
    for (const auto& [t, v] : pts) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    if (t1 - t0 < 1e-12) t1 = t0 + 1.0;
    const auto sx = [&](double t) { return margin + (t - t0) / (t1 - t0) * (width - 2 * margin); };
    const auto sy = [&](double v) { return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin); };
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (const auto& [t, v] : pts) svg << format_double(sx(t)) << ',' << format_double(sy(v)) << ' ';
    svg << "\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"" << margin - 15 << "\" font-size=\"12\">log10 E_total, "
        << format_double(lo) << " .. " << format_double(hi) << "</text>\n";
    svg << "<text x=\"" << width - margin << "\" y=\"" << height - 15
        << "\" font-size=\"12\" text-anchor=\"end\">t = " << format_double(t0) << " .. " << format_double(t1)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

json error_json(const std::string& kind, const std::string& message, int exit_code) {
  return json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", exit_code}}}};
}

}  // namespace vacuum
