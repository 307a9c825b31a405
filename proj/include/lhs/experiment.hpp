#pragma once

// Seeded parameter draws, initial data meeting a threshold, single runs,
// coupling sweeps with shared draws, and the CSV / summary writers.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lhs/config.hpp"
#include "lhs/diagnostics.hpp"
#include "lhs/errors.hpp"
#include "lhs/guarantees.hpp"
#include "lhs/integrator.hpp"
#include "lhs/linalg.hpp"
#include "lhs/model.hpp"

namespace lhs {

// Independent random streams per purpose, all derived from the run seed.
enum class Stream : unsigned { parameters = 0, initial = 1, quadruples = 2 };

inline std::mt19937_64 make_rng(unsigned long long seed, Stream stream) {
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu), static_cast<unsigned>(seed >> 32),
                    static_cast<unsigned>(stream)};
  return std::mt19937_64(seq);
}

// W0, W1, then Omega_1..Omega_N (a single draw when identical).
inline ModelParams build_params(const RunConfig& c) {
  auto rng = make_rng(c.seed, Stream::parameters);
  const std::size_t n = static_cast<std::size_t>(c.d) + 1;
  auto draw = [&](double range) {
    return c.real ? random_skew_symmetric(n, range, rng) : random_skew_hermitian(n, range, rng);
  };
  SkewHermitian w0 = draw(c.w0_range);
  SkewHermitian w1 = draw(c.w1_range);
  const std::size_t particles = static_cast<std::size_t>(c.N);
  if (c.omega_mode == OmegaMode::identical)
    return ModelParams::identical(particles, c.kappa0, c.kappa1, std::move(w0), std::move(w1),
                                  draw(c.omega_range));
  std::vector<SkewHermitian> omega;
  omega.reserve(particles);
  for (std::size_t j = 0; j < particles; ++j) omega.push_back(draw(c.omega_range));
  return ModelParams(c.kappa0, c.kappa1, std::move(w0), std::move(w1), std::move(omega));
}

// Largest J_M the initial data may have for the guarantee the run targets.
// Real runs convert angle conditions through J^2 = 1 - cos(theta). When the
// practical quartic has roots, J_+ (which lies below the complete threshold)
// is also imposed so the comparison argument applies.
inline double initial_threshold(const RunConfig& c, const ModelParams& p) {
  const double w0 = frobenius_norm(p.W0());
  const double w1 = frobenius_norm(p.W1());
  const double d_omega = omega_diameter(p);
  double thr = threshold_t41(w0);
  if (c.real) {
    double theta = threshold_p31(w0);
    if (!p.identical_omega())
      theta = std::min(std::numbers::pi / 2, std::asin(1.0 / (2.0 + std::sqrt(2.0) * w0)));
    thr = std::min(thr, std::sqrt(1.0 - std::cos(theta)));
  }
  if (c.kappa1 > 0.0 && c.kappa0 > 2.0 * c.kappa1 && c.w1_range == 0.0)
    thr = std::min(thr, threshold_t51(w0, c.kappa0, c.kappa1));
  if (!p.identical_omega() || w1 > 1e-12) {
    if (c.kappa0 > 0.0) {
      const auto roots = c.kappa1 == 0.0 ? quartic_roots_t42(c.kappa0, d_omega, w0)
                                         : quartic_roots_t52(c.kappa0, c.kappa1, d_omega, w0, w1);
      if (roots) thr = std::min(thr, roots->upper);
    }
  }
  return thr;
}

namespace detail {
inline CVector gaussian_vector(std::size_t n, bool real, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  for (auto& x : v) {
    const double re = g(rng);
    x = cplx(re, real ? 0.0 : g(rng));
  }
  return v;
}

inline Configuration perturbed(const CVector& base, const std::vector<CVector>& noise, double eps) {
  Configuration z;
  z.reserve(noise.size());
  for (const auto& eta : noise) z.push_back(normalized(base + eps * eta));
  return z;
}
}  // namespace detail

// base + eps * noise_j, renormalized, with eps bisected so that
// max J_ij <= init_margin * threshold.
inline EnsembleState gen_initial(const RunConfig& c, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw DomainError("gen_initial: threshold must be positive and finite");
  auto rng = make_rng(c.seed, Stream::initial);
  const std::size_t n = static_cast<std::size_t>(c.d) + 1;
  const CVector base = normalized(detail::gaussian_vector(n, c.real, rng));
  std::vector<CVector> noise;
  for (int j = 0; j < c.N; ++j) noise.push_back(detail::gaussian_vector(n, c.real, rng));

  const double target = c.init_margin * threshold;
  auto jm = [&](double eps) { return max_agg_functional(EnsembleState{detail::perturbed(base, noise, eps), 0.0}); };

  double lo = 0.0;
  double hi = 1.0;
  while (jm(hi) <= target && hi < 1e6) {
    lo = hi;
    hi *= 2.0;
  }
  if (jm(hi) <= target) return {detail::perturbed(base, noise, hi), 0.0};
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (jm(mid) <= target)
      lo = mid;
    else
      hi = mid;
  }
  if (!(lo > 0.0) && c.N > 1) {
    std::ostringstream os;
    os << "gen_initial: perturbation size underflowed; threshold " << threshold
       << " needs eps below " << hi;
    throw DomainError(os.str());
  }
  return {detail::perturbed(base, noise, lo), 0.0};
}

struct DiagnosticSeries {
  std::vector<double> t;
  std::vector<double> J_M;
  std::vector<double> theta_M;  // NaN for complex runs
  std::vector<double> diameter;
  std::vector<double> norm_drift;
  std::vector<double> cross_ratio_drift;  // NaN when fewer than four particles
};

inline constexpr std::size_t cross_ratio_quadruples = 20;

// Diagnostics at every recorded snapshot. Cross-ratio drift is
// max_q |C_q(t) - C_q(0)| / (1 + |C_q(0)|) over quadruples fixed at t = 0.
inline DiagnosticSeries diagnose(const Trajectory& traj, const std::vector<Quadruple>& quads) {
  DiagnosticSeries s;
  if (traj.size() == 0) return s;
  const bool real = is_real(traj.states.front(), 1e-10);
  std::vector<cplx> c0;
  for (const auto& q : quads) c0.push_back(cross_ratio(traj.states.front(), q).value);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const EnsembleState& st = traj.states[k];
    s.t.push_back(traj.times[k]);
    s.J_M.push_back(max_agg_functional(st));
    s.theta_M.push_back(real && is_real(st, 1e-10) ? max_functional(pair_angles(st)).value
                                                  : std::numeric_limits<double>::quiet_NaN());
    s.diameter.push_back(diameter(st));
    s.norm_drift.push_back(norm_drift(st));
    if (quads.empty()) {
      s.cross_ratio_drift.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double worst = 0.0;
    for (std::size_t q = 0; q < quads.size(); ++q) {
      cplx now;
      try {
        now = cross_ratio(st, quads[q], 0.0).value;
      } catch (const DegeneratePosition&) {
        now = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
      }
      worst = std::max(worst, std::abs(now - c0[q]) / (1.0 + std::abs(c0[q])));
      if (std::isnan(std::abs(now))) worst = std::numeric_limits<double>::infinity();
    }
    s.cross_ratio_drift.push_back(worst);
  }
  return s;
}

struct RunResult {
  RunConfig config;
  ModelParams params;
  EnsembleState initial;
  double threshold = 0.0;
  Trajectory trajectory;
  DiagnosticSeries series;
  std::vector<GuaranteeReport> reports;
  double tail = 0.0;  // tail_sup of J_M
};

inline IntegrationPlan plan_for(const RunConfig& c) {
  IntegrationPlan plan;
  plan.dt = c.dt;
  plan.t_final = c.t_final;
  plan.record_stride = static_cast<std::size_t>(c.record_stride);
  plan.renormalize = c.renormalize;
  return plan;
}

// Integrates prepared (params, init) under config c. Trajectories are
// dropped afterwards unless keep_trajectory is set.
inline RunResult execute(const RunConfig& c, const ModelParams& p, const EnsembleState& init,
                         double threshold, bool keep_trajectory = true) {
  RunResult r{c, p, init, threshold, {}, {}, {}, 0.0};
  Trajectory traj = simulate(init, p, plan_for(c));
  std::vector<Quadruple> quads;
  if (init.size() >= 4) {
    auto rng = make_rng(c.seed, Stream::quadruples);
    quads = sample_quadruples(init, cross_ratio_quadruples, rng);
  }
  r.series = diagnose(traj, quads);
  CheckOptions opt;
  opt.tail_fraction = c.tail_fraction;
  r.reports = check_run(p, init, traj, opt);
  r.tail = tail_sup(r.series.t, r.series.J_M, c.tail_fraction);
  if (keep_trajectory) r.trajectory = std::move(traj);
  return r;
}

inline RunResult run_single(const RunConfig& c, bool keep_trajectory = true) {
  const ModelParams p = build_params(c);
  const double thr = initial_threshold(c, p);
  return execute(c, p, gen_initial(c, thr), thr, keep_trajectory);
}

// ------------------------------------------------------------------ output

namespace detail {
inline std::string g17(double x) {
  if (std::isnan(x)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string short_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}
}  // namespace detail

inline std::string timeseries_name(const RunConfig& c) {
  return "run_" + std::to_string(c.seed) + "_" + detail::short_num(c.kappa0) + ".csv";
}

inline void write_timeseries(const DiagnosticSeries& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "t,J_M,theta_M,diameter,norm_drift,cross_ratio_drift\n";
  for (std::size_t k = 0; k < s.t.size(); ++k)
    out << detail::g17(s.t[k]) << ',' << detail::g17(s.J_M[k]) << ',' << detail::g17(s.theta_M[k]) << ','
        << detail::g17(s.diameter[k]) << ',' << detail::g17(s.norm_drift[k]) << ','
        << detail::g17(s.cross_ratio_drift[k]) << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

using SummaryLines = std::vector<std::pair<std::string, std::string>>;

inline void append_reports(SummaryLines& out, const std::string& prefix,
                           const std::vector<GuaranteeReport>& reports) {
  for (const auto& r : reports) {
    const std::string k = prefix + to_string(r.theorem) + ".";
    out.emplace_back(k + "hypothesis", r.hypothesis_satisfied ? "satisfied" : "not_satisfied");
    out.emplace_back(k + "threshold", detail::g17(r.threshold_value));
    out.emplace_back(k + "observed_initial", detail::g17(r.observed_initial));
    if (r.predicted_rate) out.emplace_back(k + "rate", detail::g17(*r.predicted_rate));
    if (r.roots) {
      out.emplace_back(k + "root_lower", detail::g17(r.roots->lower));
      out.emplace_back(k + "root_upper", detail::g17(r.roots->upper));
    }
    out.emplace_back(k + "verdict", to_string(r.outcome));
    if (!std::isnan(r.worst_margin)) out.emplace_back(k + "worst_margin", detail::g17(r.worst_margin));
    out.emplace_back(k + "details", r.verdict_details);
  }
}

inline SummaryLines run_summary(const RunResult& r, const std::string& prefix = {}) {
  SummaryLines out;
  for (const auto& [k, v] : config_echo(r.config)) out.emplace_back(prefix + "config." + k, v);
  out.emplace_back(prefix + "omega_diameter", detail::g17(omega_diameter(r.params)));
  out.emplace_back(prefix + "w0_norm", detail::g17(frobenius_norm(r.params.W0())));
  out.emplace_back(prefix + "w1_norm", detail::g17(frobenius_norm(r.params.W1())));
  out.emplace_back(prefix + "initial_threshold", detail::g17(r.threshold));
  out.emplace_back(prefix + "J_M_initial", detail::g17(r.series.J_M.front()));
  out.emplace_back(prefix + "J_M_final", detail::g17(r.series.J_M.back()));
  out.emplace_back(prefix + "tail_sup_J_M", detail::g17(r.tail));
  double drift = 0.0, cr = 0.0;
  for (double x : r.series.norm_drift) drift = std::max(drift, x);
  for (double x : r.series.cross_ratio_drift)
    if (!std::isnan(x)) cr = std::max(cr, x);
  out.emplace_back(prefix + "max_norm_drift", detail::g17(drift));
  out.emplace_back(prefix + "max_cross_ratio_drift", detail::g17(cr));
  out.emplace_back(prefix + "timeseries", timeseries_name(r.config));
  append_reports(out, prefix, r.reports);
  return out;
}

inline void write_summary(const SummaryLines& lines, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (const auto& [k, v] : lines) out << k << '=' << v << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void write_run(const RunResult& r) {
  const std::filesystem::path dir = r.config.output_dir;
  std::filesystem::create_directories(dir);
  write_timeseries(r.series, dir / timeseries_name(r.config));
  write_summary(run_summary(r), dir / "summary.txt");
}

// ------------------------------------------------------------------- sweeps

struct SweepMember {
  unsigned long long seed;
  double kappa0;
  double tail;
  double jm_initial;
  std::optional<RootPair> roots;
  std::vector<GuaranteeReport> reports;
  RunResult result;
};

struct OrderingRow {
  double kappa0 = 0.0;
  int lower_pass = 0;  // sqrt(k) B(k) < B(1)
  int upper_pass = 0;  // B(1) < k B(k)
  int both_pass = 0;
  int total = 0;
};

struct TailBoundRow {
  double kappa0 = 0.0;
  int applicable = 0;  // roots exist and J_M(0) < J+
  int pass = 0;        // tail_sup <= 1.25 J-
};

struct SweepReport {
  SweepConfig config;
  std::vector<SweepMember> members;  // replicate-major, kappa0 ascending inside
  int decreasing_pass = 0;           // replicates with B strictly decreasing in kappa0
  int replicates = 0;
  std::vector<OrderingRow> ordering;
  std::vector<TailBoundRow> tail_bounds;
  std::optional<double> slope;  // log B against log kappa0 over kappa0 > 1

  const SweepMember& member(int replicate, std::size_t kappa_index) const {
    return members[static_cast<std::size_t>(replicate) * config.kappa0_values.size() + kappa_index];
  }
};

// Every member of a replicate shares Omega, W0, W1 and the initial data;
// only kappa0 changes. The initial threshold is the smallest one any swept
// coupling would ask for.
inline SweepReport run_sweep(const SweepConfig& s, double tail_slack = 0.25) {
  SweepReport rep;
  rep.config = s;
  rep.replicates = s.replicates;
  const std::size_t nk = s.kappa0_values.size();

  std::vector<std::future<SweepMember>> jobs;
  for (int r = 0; r < s.replicates; ++r) {
    RunConfig base = s.base;
    base.seed = s.base.seed + static_cast<unsigned long long>(r);
    base.kappa0 = s.kappa0_values.front();
    const ModelParams p0 = build_params(base);
    double thr = std::numeric_limits<double>::infinity();
    for (double k : s.kappa0_values) {
      RunConfig c = base;
      c.kappa0 = k;
      thr = std::min(thr, initial_threshold(c, p0.with_kappa0(k)));
    }
    const EnsembleState init = gen_initial(base, thr);
    for (double k : s.kappa0_values) {
      RunConfig c = base;
      c.kappa0 = k;
      jobs.push_back(std::async(std::launch::async, [c, p = p0.with_kappa0(k), init, thr] {
        RunResult res = execute(c, p, init, thr, false);
        const double w0 = frobenius_norm(p.W0()), w1 = frobenius_norm(p.W1());
        auto roots = c.kappa1 == 0.0 ? quartic_roots_t42(c.kappa0, omega_diameter(p), w0)
                                     : quartic_roots_t52(c.kappa0, c.kappa1, omega_diameter(p), w0, w1);
        const double tail = res.tail;
        const double jm0 = res.series.J_M.front();
        auto reports = res.reports;
        return SweepMember{c.seed, c.kappa0, tail, jm0, roots, std::move(reports), std::move(res)};
      }));
    }
  }
  for (auto& j : jobs) rep.members.push_back(j.get());

  for (int r = 0; r < s.replicates; ++r) {
    bool dec = true;
    for (std::size_t i = 1; i < nk; ++i) dec = dec && rep.member(r, i).tail < rep.member(r, i - 1).tail;
    if (dec) ++rep.decreasing_pass;
  }

  const auto anchor = std::find(s.kappa0_values.begin(), s.kappa0_values.end(), 1.0);
  if (s.ordering_check && nk > 1 && anchor != s.kappa0_values.end()) {
    const std::size_t a = static_cast<std::size_t>(anchor - s.kappa0_values.begin());
    for (std::size_t i = 0; i < nk; ++i) {
      const double k = s.kappa0_values[i];
      if (!(k > 1.0)) continue;
      OrderingRow row;
      row.kappa0 = k;
      for (int r = 0; r < s.replicates; ++r) {
        const double b1 = rep.member(r, a).tail;
        const double bk = rep.member(r, i).tail;
        const bool lower = std::sqrt(k) * bk < b1;
        const bool upper = b1 < k * bk;
        row.lower_pass += lower;
        row.upper_pass += upper;
        row.both_pass += lower && upper;
        ++row.total;
      }
      rep.ordering.push_back(row);
    }
  }

  for (std::size_t i = 0; i < nk; ++i) {
    TailBoundRow row;
    row.kappa0 = s.kappa0_values[i];
    for (int r = 0; r < s.replicates; ++r) {
      const SweepMember& m = rep.member(r, i);
      if (!m.roots || !(m.jm_initial < m.roots->upper)) continue;
      ++row.applicable;
      if (m.tail <= (1.0 + tail_slack) * m.roots->lower) ++row.pass;
    }
    rep.tail_bounds.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& m : rep.members)
    if (m.kappa0 > 1.0 && m.tail > 0.0) {
      xs.push_back(std::log(m.kappa0));
      ys.push_back(std::log(m.tail));
    }
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx > 0) rep.slope = sxy / sxx;
  }
  return rep;
}

inline SummaryLines sweep_summary(const SweepReport& rep) {
  SummaryLines out;
  for (const auto& [k, v] : config_echo(rep.config.base))
    if (k != "kappa0" && k != "seed") out.emplace_back("config." + k, v);
  out.emplace_back("config.seed", std::to_string(rep.config.base.seed));
  std::string ks = "[";
  for (std::size_t i = 0; i < rep.config.kappa0_values.size(); ++i)
    ks += (i ? ", " : "") + detail::short_num(rep.config.kappa0_values[i]);
  out.emplace_back("config.kappa0_values", ks + "]");
  out.emplace_back("config.replicates", std::to_string(rep.config.replicates));
  out.emplace_back("config.ordering_check", rep.config.ordering_check ? "true" : "false");

  for (const auto& m : rep.members) {
    const std::string p = "run." + std::to_string(m.seed) + "." + detail::short_num(m.kappa0) + ".";
    out.emplace_back(p + "tail_sup_J_M", detail::g17(m.tail));
    out.emplace_back(p + "J_M_initial", detail::g17(m.jm_initial));
    if (m.roots) {
      out.emplace_back(p + "J_minus", detail::g17(m.roots->lower));
      out.emplace_back(p + "J_plus", detail::g17(m.roots->upper));
    }
    out.emplace_back(p + "timeseries", timeseries_name(m.result.config));
    append_reports(out, p, m.reports);
  }
  out.emplace_back("decreasing.pass", std::to_string(rep.decreasing_pass) + "/" +
                                          std::to_string(rep.replicates));
  for (const auto& o : rep.ordering) {
    const std::string p = "ordering." + detail::short_num(o.kappa0) + ".";
    const std::string of = "/" + std::to_string(o.total);
    out.emplace_back(p + "sqrt_lower_pass", std::to_string(o.lower_pass) + of);
    out.emplace_back(p + "linear_upper_pass", std::to_string(o.upper_pass) + of);
    out.emplace_back(p + "both_pass", std::to_string(o.both_pass) + of);
  }
  for (const auto& t : rep.tail_bounds) {
    const std::string p = "tail_bound." + detail::short_num(t.kappa0) + ".";
    out.emplace_back(p + "applicable", std::to_string(t.applicable));
    out.emplace_back(p + "pass", std::to_string(t.pass));
  }
  if (rep.slope) out.emplace_back("scaling.log_slope", detail::g17(*rep.slope));
  return out;
}

inline void write_sweep(const SweepReport& rep) {
  const std::filesystem::path dir = rep.config.base.output_dir;
  std::filesystem::create_directories(dir);
  for (const auto& m : rep.members) write_timeseries(m.result.series, dir / timeseries_name(m.result.config));
  write_summary(sweep_summary(rep), dir / "summary.txt");
}

}  // namespace lhs
