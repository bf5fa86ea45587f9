#include <cmath>
#include <limits>

#include "fluxspin/cli/app.hpp"
#include "fluxspin/cli/svg.hpp"
#include "fluxspin/telegraph.hpp"

namespace fluxspin::cli {

using nlohmann::json;

namespace {

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec_json(const PrecessionVector& v) { return json::array({v.x, v.y, v.z}); }

json decay_json(const DecayAnalysis& d) {
  json j = {{"gamma_decay", d.gamma_decay},
            {"omega_observed", d.omega_observed},
            {"method", d.method == DecayMethod::Spectral ? "spectral" : "time_domain_fit"},
            {"fit_residual", d.fit_residual},
            {"oscillating", d.oscillating},
            {"amplitude", d.amplitude}};
  j["confidence"] = d.confidence ? json(*d.confidence) : json(nullptr);
  return j;
}

BlochVector spin_of(const std::array<double, 3>& a) { return BlochVector::pure(a[0], a[1], a[2]); }

std::vector<double> time_grid(const FluctuatorSpec& spec, const TimeGridConfig& g) {
  if (g.points == 0) return default_time_grid(spec);
  const double t_end = g.t_end > 0 ? g.t_end : default_time_grid(spec).back();
  return linear_grid(0.0, t_end, g.points);
}

// Rate used for the dimensionless time axis of single-spec plots.
double rate_scale(const FluctuatorSpec& spec) {
  const double r = spec.max_exit_rate();
  if (r > 0) return r;
  double w = 0;
  for (const auto& o : spec.omegas()) w = std::max(w, o.norm());
  return w;
}

CommandOutput simulate(const RunConfig& c, const SimulateConfig& p) {
  const FluctuatorSpec spec = p.fluctuator.build();
  const Generator g(spec);
  const JointState s0 = initial_joint_state(spec, spin_of(p.initial_spin), p.occupation.build());
  const std::vector<double> times = time_grid(spec, p.grid);
  const std::vector<JointState> states = propagate(g, s0, times);

  std::vector<std::string> header{"t_us", "sx", "sy", "sz"};
  for (int i = 0; i < spec.n_states(); ++i) header.push_back("p_" + std::to_string(i + 1));
  CommandOutput out;
  out.table = CsvTable(header);
  json bloch = json::array(), pops = json::array();
  PlotPanel panel{"Reduced Bloch vector", {"t (us)", false, 0, ""}, {"component", false, 0, ""}, {}};
  const double scale = rate_scale(spec);
  if (scale > 0) {
    panel.x.scale = 1.0 / scale;
    panel.x.scaled_label = "t x r_max";
  }
  panel.series = {{"sx", {}, {}, {}, true, false, false}, {"sy", {}, {}, {}, true, false, false}, {"sz", {}, {}, {}, true, false, false}};
  for (std::size_t k = 0; k < times.size(); ++k) {
    const BlochVector b = bloch_from_density(reduce(states[k]));
    const Eigen::VectorXd pk = states[k].populations();
    std::vector<CsvCell> row{times[k], b.sx, b.sy, b.sz};
    json pj = json::array();
    for (int i = 0; i < spec.n_states(); ++i) {
      row.emplace_back(pk(i));
      pj.push_back(pk(i));
    }
    out.table.add_row(std::move(row));
    bloch.push_back(vec_json(b.vector()));
    pops.push_back(pj);
    for (int d = 0; d < 3; ++d) {
      panel.series[static_cast<std::size_t>(d)].x.push_back(times[k]);
      panel.series[static_cast<std::size_t>(d)].y.push_back(b.vector()(d));
    }
  }
  out.payload = {{"times", times}, {"bloch", bloch}, {"populations", pops}, {"labels", spec.labels()}};
  try {
    const DecayAnalysis d = analyze_decay(g, s0);
    out.payload["decay"] = decay_json(d);
    out.summary = "simulate: " + std::to_string(times.size()) + " points, Gamma = " + format_double(d.gamma_decay) + " /us";
  } catch (const Error& e) {
    out.payload["decay"] = nullptr;
    out.payload["decay_error"] = e.what();
    out.summary = "simulate: " + std::to_string(times.size()) + " points, decay not extracted (" + e.what() + ")";
  }
  out.valid_points = out.total_points = 1;
  if (c.plot) out.svg = render_svg({panel});
  return out;
}

CommandOutput crossover(const RunConfig& c, const CrossoverConfig& p) {
  const std::vector<double> grid = p.grid();
  const CrossoverCurve curve = crossover_scan(p.build(), grid, c.workers);
  const double r = curve.rate_scale;
  CommandOutput out;
  out.table = CsvTable({"delta_omega", "delta_omega_over_rate", "gamma", "gamma_over_rate", "omega_observed", "valid"});
  json points = json::array();
  PlotSeries series{"Gamma", {}, {}, {}, true, true, false};
  for (const auto& pt : curve.points) {
    out.table.add_row({pt.delta_omega, pt.delta_omega / r, pt.gamma_decay, pt.gamma_decay / r, pt.omega_observed,
                       static_cast<long long>(pt.valid)});
    points.push_back({{"delta_omega", pt.delta_omega},
                      {"gamma_decay", pt.gamma_decay},
                      {"omega_observed", pt.omega_observed},
                      {"valid", pt.valid},
                      {"error", pt.error}});
    ++out.total_points;
    if (pt.valid) {
      ++out.valid_points;
      series.x.push_back(pt.delta_omega);
      series.y.push_back(pt.gamma_decay);
    } else {
      out.failures.push_back({{"delta_omega", pt.delta_omega}, {"error", pt.error}});
    }
  }
  out.payload = {{"rate_scale", r}, {"points", points}};
  out.summary = "crossover: " + std::to_string(out.valid_points) + "/" + std::to_string(out.total_points) + " points valid";
  if (c.plot) {
    PlotPanel panel{"Decoherence rate vs differential precession frequency",
                    {"delta omega (rad/us)", true, r, "delta omega / r_tot"},
                    {"Gamma (1/us)", true, r, "Gamma / r_tot"},
                    {series}};
    out.svg = render_svg({panel});
  }
  return out;
}

json prep_json(const PreparationStats& s) {
  return {{"gamma_mean", s.gamma_mean}, {"gamma_std", s.gamma_std}, {"shift_mean", s.shift_mean}, {"shift_std", s.shift_std},
          {"n_valid", s.n_valid}};
}

CommandOutput fig2(const RunConfig& c, const Fig2Config& p) {
  const EnsembleSpec e = p.build(c.seed);
  const SweepResult sweep = reproduce_fig2(e, p.grid(), c.workers);
  const double g = sweep.gamma_rad;
  CommandOutput out;
  out.table = CsvTable({"omega_g", "omega_g_over_gamma", "gamma_mean", "gamma_mean_over_gamma", "gamma_std", "shift_mean",
                        "shift_std", "gamma_x_mean", "gamma_x_std", "gamma_z_mean", "gamma_z_std", "n_valid_x", "n_valid_z",
                        "n_failed"});
  json rows = json::array();
  PlotSeries gamma{"Gamma (mean +- std)", {}, {}, {}, true, true, false};
  PlotSeries offset{"Gamma_0", {}, {}, {}, true, false, true};
  PlotSeries shift{"frequency shift (mean +- std)", {}, {}, {}, true, true, false};
  for (const auto& row : sweep.rows) {
    out.table.add_row({row.omega_g, row.omega_g / g, row.gamma_mean, row.gamma_mean / g, row.gamma_std, row.shift_mean,
                       row.shift_std, row.x.gamma_mean, row.x.gamma_std, row.z.gamma_mean, row.z.gamma_std,
                       static_cast<long long>(row.x.n_valid), static_cast<long long>(row.z.n_valid),
                       static_cast<long long>(row.n_failed)});
    rows.push_back({{"omega_g", row.omega_g},
                    {"gamma_mean", row.gamma_mean},
                    {"gamma_std", row.gamma_std},
                    {"shift_mean", row.shift_mean},
                    {"shift_std", row.shift_std},
                    {"x", prep_json(row.x)},
                    {"z", prep_json(row.z)},
                    {"n_failed", row.n_failed}});
    const auto cells = static_cast<std::size_t>(2 * sweep.n_realizations);
    out.total_points += cells;
    out.valid_points += cells - static_cast<std::size_t>(row.n_failed);
    if (row.n_failed > 0) out.failures.push_back({{"omega_g", row.omega_g}, {"n_failed", row.n_failed}});
    gamma.x.push_back(row.omega_g);
    gamma.y.push_back(row.gamma_mean);
    gamma.error.push_back(row.gamma_std);
    offset.x.push_back(row.omega_g);
    offset.y.push_back(sweep.gamma0_offset);
    shift.x.push_back(row.omega_g);
    shift.y.push_back(row.shift_mean);
    shift.error.push_back(row.shift_std);
  }
  out.payload = {{"gamma_rad", g},
                 {"gamma0_offset", sweep.gamma0_offset},
                 {"gamma_dark", sweep.gamma_dark},
                 {"n_realizations", sweep.n_realizations},
                 {"photons_per_coherence", sweep.photons_per_coherence()},
                 {"rows", rows}};
  out.summary = "fig2: " + std::to_string(sweep.rows.size()) + " field values, " + std::to_string(out.valid_points) + "/" +
                std::to_string(out.total_points) + " extractions valid, gamma/Gamma_0 = " +
                format_double(sweep.photons_per_coherence());
  if (c.plot) {
    PlotPanel a{"(a) Decoherence rate", {"omega_g (rad/us)", true, g, "omega_g / gamma"}, {"Gamma (1/us)", true, g, "Gamma / gamma"},
                {gamma, offset}};
    PlotPanel b{"(b) Shift of average Larmor precession frequency",
                {"omega_g (rad/us)", true, g, "omega_g / gamma"},
                {"|<omega>| - omega_g (rad/us)", false, g, "shift / gamma"},
                {shift}};
    out.svg = render_svg({a, b});
  }
  return out;
}

CommandOutput mc_validate(const RunConfig& c, const McValidateConfig& p) {
  const FluctuatorSpec spec = p.fluctuator.build();
  const std::vector<double> times = time_grid(spec, p.grid);
  const BlochVector b0 = spin_of(p.initial_spin);
  const Occupation occ = p.occupation.build();
  const EnsembleResult mc = ensemble_average(spec, b0, occ, p.trajectories, times, c.seed, c.workers);
  const std::vector<JointState> me = propagate(Generator(spec), initial_joint_state(spec, b0, occ), times);

  CommandOutput out;
  out.table = CsvTable({"t_us", "mc_sx", "mc_sy", "mc_sz", "se_sx", "se_sy", "se_sz", "me_sx", "me_sy", "me_sz", "max_dev_se"});
  json mean = json::array(), se = json::array(), exact = json::array();
  double worst = 0.0;
  bool pass = true;
  std::vector<PlotSeries> series;
  const char* names[] = {"sx", "sy", "sz"};
  for (int d = 0; d < 3; ++d) {
    series.push_back({std::string("MC ") + names[d], {}, {}, {}, false, true, false});
    series.push_back({std::string("ME ") + names[d], {}, {}, {}, true, false, false});
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Eigen::Vector3d m = bloch_from_density(reduce(me[k])).vector();
    double dev = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double diff = std::abs(mc.mean[k](d) - m(d));
      const double s = mc.standard_error[k](d);
      if (diff > p.threshold_se * s + 1e-12) pass = false;
      dev = std::max(dev, s > 0 ? diff / s : (diff > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0));
      auto& mcs = series[static_cast<std::size_t>(2 * d)];
      mcs.x.push_back(times[k]);
      mcs.y.push_back(mc.mean[k](d));
      mcs.error.push_back(s);
      auto& mes = series[static_cast<std::size_t>(2 * d + 1)];
      mes.x.push_back(times[k]);
      mes.y.push_back(m(d));
    }
    worst = std::max(worst, dev);
    out.table.add_row({times[k], mc.mean[k](0), mc.mean[k](1), mc.mean[k](2), mc.standard_error[k](0), mc.standard_error[k](1),
                       mc.standard_error[k](2), m(0), m(1), m(2), dev});
    mean.push_back(vec_json(mc.mean[k]));
    se.push_back(vec_json(mc.standard_error[k]));
    exact.push_back(vec_json(m));
  }
  out.payload = {{"times", times},
                 {"mc_mean", mean},
                 {"mc_standard_error", se},
                 {"me_bloch", exact},
                 {"n_trajectories", mc.n_trajectories},
                 {"n_absorbed", mc.n_absorbed},
                 {"seed", mc.seed},
                 {"threshold_se", p.threshold_se},
                 {"max_deviation_se", std::isfinite(worst) ? json(worst) : json(nullptr)},
                 {"pass", pass}};
  out.valid_points = out.total_points = 1;
  out.summary = std::string("mc-validate: ") + (pass ? "PASS" : "FAIL") + ", max deviation " + format_double(worst) +
                " standard errors over " + std::to_string(times.size()) + " times";
  if (c.plot) {
    const double scale = rate_scale(spec);
    PlotPanel panel{"Monte Carlo vs master equation", {"t (us)", false, scale > 0 ? 1.0 / scale : 0.0, "t x r_max"},
                    {"component", false, 0, ""}, series};
    out.svg = render_svg({panel});
  }
  return out;
}

CommandOutput sweetspot(const RunConfig& c, const SweetspotConfig& p) {
  const FluctuatorSpec spec = p.fluctuator.build();
  const Occupation occ = p.occupation.build();
  const SweetSpotResult r = sweet_spot(spec, occ);
  CommandOutput out;
  out.table = CsvTable({"cx", "cy", "cz", "ls_x", "ls_y", "ls_z", "uncompensated_gamma", "residual_gamma", "compensable"});
  out.table.add_row({r.compensation.x, r.compensation.y, r.compensation.z, r.least_squares.x, r.least_squares.y,
                     r.least_squares.z, r.uncompensated_gamma, r.residual_gamma, static_cast<long long>(r.compensable)});
  out.payload = {{"compensation", vec_json(r.compensation)},
                 {"least_squares", vec_json(r.least_squares)},
                 {"uncompensated_gamma", r.uncompensated_gamma},
                 {"residual_gamma", r.residual_gamma},
                 {"compensable", r.compensable}};
  out.valid_points = out.total_points = 1;
  out.summary = "sweetspot: Gamma " + format_double(r.uncompensated_gamma) + " -> " + format_double(r.residual_gamma) + " /us" +
                (r.compensable ? "" : " (not exactly compensable)");
  if (c.plot) {
    // Gamma along the straight path from no shift to the returned shift.
    PlotSeries path{"Gamma along s x compensation", {}, {}, {}, true, true, false};
    const Eigen::Vector3d probe_dir = sweet_spot_probe(spec);
    for (double s : linear_grid(0.0, 1.25, 26)) {
      std::vector<PrecessionVector> w = spec.omegas();
      for (std::size_t j = 1; j < w.size(); ++j) w[j] += r.compensation * s;
      const FluctuatorSpec shifted = spec.with_omegas(w);
      try {
        const double gamma =
            analyze_decay(Generator(shifted), initial_joint_state(shifted, BlochVector::pure(probe_dir), occ)).gamma_decay;
        path.x.push_back(s);
        path.y.push_back(gamma);
      } catch (const Error&) {
      }
    }
    const double scale = rate_scale(spec);
    PlotPanel panel{"Sweet-spot compensation", {"s (fraction of compensation)", false, 0, ""},
                    {"Gamma (1/us)", false, scale, "Gamma / r_max"}, {path}};
    out.svg = render_svg({panel});
  }
  return out;
}

}  // namespace

CommandOutput run_command(const RunConfig& config) {
  return std::visit(
      [&](const auto& p) -> CommandOutput {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SimulateConfig>)
          return simulate(config, p);
        else if constexpr (std::is_same_v<T, CrossoverConfig>)
          return crossover(config, p);
        else if constexpr (std::is_same_v<T, Fig2Config>)
          return fig2(config, p);
        else if constexpr (std::is_same_v<T, McValidateConfig>)
          return mc_validate(config, p);
        else
          return sweetspot(config, p);
      },
      config.params);
}

}  // namespace fluxspin::cli
