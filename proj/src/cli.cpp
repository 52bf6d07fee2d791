#include "demix/cli.hpp"
#include "demix/bandwidth.hpp"
#include "demix/deconv.hpp"
#include "demix/errors.hpp"
#include "demix/io.hpp"
#include "demix/smoothness.hpp"
#include "demix/uniformmix.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace demix {

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    out.push_back(cur);
  return out;
}

double to_real(const std::string& s, const std::string& what)
{
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size())
      throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + ": expected a number, got '" + s + "'");
  }
}

std::int64_t to_int(const std::string& s, const std::string& what)
{
  const double v = to_real(s, what);
  if (v != std::floor(v) || std::fabs(v) > 9e15)
    throw ValidationError(what + ": expected an integer, got '" + s + "'");
  return static_cast<std::int64_t>(v);
}

std::vector<double> real_list(const std::string& s, const std::string& what)
{
  std::vector<double> v;
  for (const auto& p : split(s, ','))
    v.push_back(to_real(p, what));
  if (v.empty())
    throw ValidationError(what + ": empty list");
  return v;
}

PowerSeriesFamily family_from(const std::string& name, double shape)
{
  if (name == "poisson")
    return PowerSeriesFamily::poisson();
  if (name == "geometric")
    return PowerSeriesFamily::geometric();
  if (name == "negbin" || name == "negative-binomial")
    return PowerSeriesFamily::negative_binomial(shape);
  throw ValidationError("unknown family '" + name + "' (poisson, geometric, negbin)");
}

MeasureSpec measure_from(double a, double b)
{
  if (std::isinf(b))
    return MeasureSpec::exp_weight(2);
  return MeasureSpec::interval(a, b);
}

MRule::Kind rule_kind(const std::string& s)
{
  if (s == "fixed")
    return MRule::Kind::fixed;
  if (s == "poisson")
    return MRule::Kind::poisson;
  if (s == "finite-r")
    return MRule::Kind::finite_r;
  if (s == "halfline")
    return MRule::Kind::halfline;
  if (s == "uniform")
    return MRule::Kind::uniform;
  throw ValidationError("unknown bandwidth rule '" + s + "'");
}

std::string num(double v)
{
  return fmt_num(v);
}

//! Writes to --out or the given stream.
void emit(const std::string& path, const std::string& text, std::ostream& out)
{
  if (path.empty() || path == "-")
    out << text;
  else
    write_file(path, text);
}

struct Common
{
  std::string family = "poisson";
  double shape = 1;
  double a = 0, b = 1;
  std::string out;
};

void add_family(CLI::App* app, Common& c)
{
  app->add_option("--family", c.family, "poisson | geometric | negbin");
  app->add_option("--shape", c.shape, "negative binomial shape");
  app->add_option("--a", c.a, "lower end of Θ");
  app->add_option("--b", c.b, "upper end of Θ (inf for the half-line)");
}

int cmd_poly(const std::string& measure, double a, double b, int rate, int m, const std::string& out_path, std::ostream& out)
{
  MeasureSpec ms;
  if (measure == "legendre")
    ms = MeasureSpec::legendre();
  else if (measure == "interval")
    ms = MeasureSpec::interval(a, b);
  else if (measure == "exp")
    ms = MeasureSpec::exp_weight(rate);
  else
    throw ValidationError("unknown measure '" + measure + "' (legendre, interval, exp)");
  if (m < 0)
    throw ValidationError("--m must be nonnegative");
  auto Q = orthonormal_coeffs(recurrence_for(ms, std::max(m, 1)), m);
  std::string s = "k";
  for (int l = 0; l < m; ++l)
    s += ",c" + std::to_string(l);
  s += "\n";
  for (int k = 0; k < m; ++k) {
    s += std::to_string(k);
    for (int l = 0; l < m; ++l)
      s += "," + num(l <= k ? static_cast<double>(Q(k, l)) : 0.0);
    s += "\n";
  }
  emit(out_path, s, out);
  return 0;
}

} // namespace

const std::set<std::string>& sim_config_keys()
{
  static const std::set<std::string> keys{ "scenario", "family", "a",     "b",       "shape", "true_f",
                                           "n_grid",   "replicates", "seed", "bandwidth", "tau",   "beta",
                                           "m",        "out",    "noise", "kmin",    "kmax",  "lambda1",
                                           "alpha",    "eta" };
  return keys;
}

Density parse_density_spec(const std::string& spec, const PowerSeriesFamily& family, const MeasureSpec& measure)
{
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::vector<double> args =
    colon == std::string::npos ? std::vector<double>{} : real_list(spec.substr(colon + 1), "true_f");
  const double a = measure.bounded() ? measure.a() : 0.0;
  const double b = measure.bounded() ? measure.b() : INFINITY;
  if (kind == "uniform") {
    if (!measure.bounded())
      throw ValidationError("true_f uniform needs a bounded interval");
    const double h = 1 / (b - a);
    return [a, b, h](double t) { return (t >= a && t <= b) ? h : 0.0; };
  }
  if (kind == "beta") {
    if (args.size() != 2 || !(args[0] > 0) || !(args[1] > 0) || !measure.bounded())
      throw ValidationError("true_f beta:p,q needs p, q > 0 and a bounded interval");
    const double p = args[0], q = args[1];
    const double norm = std::beta(p, q) * (b - a);
    return [a, b, p, q, norm](double t) {
      if (t < a || t > b)
        return 0.0;
      const double x = (t - a) / (b - a);
      return std::pow(x, p - 1) * std::pow(1 - x, q - 1) / norm;
    };
  }
  if (kind == "exp") {
    if (args.size() != 1 || !(args[0] > 0))
      throw ValidationError("true_f exp:rate needs rate > 0");
    const double r = args[0];
    const double mass = measure.bounded() ? std::exp(-r * a) - std::exp(-r * b) : 1.0;
    return [a, b, r, mass](double t) { return (t >= a && t <= b) ? r * std::exp(-r * t) / mass : 0.0; };
  }
  if (kind == "factory") {
    if (args.size() != 3)
      throw ValidationError("true_f factory:alpha,C,r needs three values");
    auto f = smooth_density_factory(family, measure, SmoothnessSeq::power(args[0]), static_cast<int>(args[2]), args[1]);
    return f.as_density();
  }
  throw ValidationError("unknown true_f '" + spec + "'");
}

IntegerPmf parse_pmf_spec(const std::string& spec, std::int64_t default_offset)
{
  std::string body = spec;
  std::int64_t offset = default_offset;
  if (body.rfind("pmf@", 0) == 0) {
    const auto colon = body.find(':');
    if (colon == std::string::npos)
      throw ValidationError("pmf spec: missing ':'");
    offset = to_int(body.substr(4, colon - 4), "pmf offset");
    body = body.substr(colon + 1);
  } else if (body.rfind("pmf:", 0) == 0) {
    body = body.substr(4);
  }
  return make_noise_pmf(offset, real_list(body, "pmf"));
}

SimConfig sim_config_from(const std::map<std::string, std::string>& kv)
{
  auto get = [&](const std::string& k, const std::string& def = {}) {
    auto it = kv.find(k);
    return it == kv.end() ? def : it->second;
  };
  auto need = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end())
      throw ValidationError("config: missing key '" + k + "'");
    return it->second;
  };
  SimConfig c;
  const std::string scenario = get("scenario", "power-series");
  if (scenario == "power-series")
    c.scenario = Scenario::power_series;
  else if (scenario == "deconv")
    c.scenario = Scenario::deconv;
  else if (scenario == "uniform")
    c.scenario = Scenario::uniform;
  else
    throw ValidationError("config: unknown scenario '" + scenario + "'");

  c.family = family_from(get("family", "poisson"), to_real(get("shape", "1"), "shape"));
  const std::string bs = get("b", "1");
  c.measure = measure_from(to_real(get("a", "0"), "a"), bs == "inf" ? INFINITY : to_real(bs, "b"));
  for (const auto& n : split(need("n_grid"), ','))
    c.n_grid.push_back(static_cast<double>(to_int(n, "n_grid")));
  c.replicates = static_cast<int>(to_int(get("replicates", "100"), "replicates"));
  const std::string seed = get("seed", "0");
  try {
    std::size_t pos = 0;
    c.seed = std::stoull(seed, &pos, 0);
    if (pos != seed.size())
      throw std::invalid_argument(seed);
  } catch (const std::exception&) {
    throw ValidationError("config: seed must be a 64-bit unsigned integer");
  }

  MRule& r = c.m_rule;
  r.kind = rule_kind(get("bandwidth", c.scenario == Scenario::uniform && !kv.count("m") ? "uniform" : "fixed"));
  if (kv.count("m"))
    r.m = static_cast<int>(to_int(get("m"), "m"));
  else if (r.kind == MRule::Kind::fixed && c.scenario != Scenario::deconv)
    throw ValidationError("config: fixed bandwidth needs m");
  if (kv.count("tau"))
    r.tau = to_real(get("tau"), "tau");
  r.beta = to_real(get("beta", "0.25"), "beta");
  r.lambda1 = to_real(get("lambda1", "4.5"), "lambda1");
  r.alpha = to_real(get("alpha", "1"), "alpha");

  switch (c.scenario) {
    case Scenario::power_series:
      c.true_f = parse_density_spec(get("true_f", "uniform"), c.family, c.measure);
      break;
    case Scenario::uniform:
      c.true_pmf = parse_pmf_spec(need("true_f"), 1);
      break;
    case Scenario::deconv:
      c.true_pmf = parse_pmf_spec(need("true_f"), 0);
      c.noise = parse_pmf_spec(need("noise"), 0);
      c.kmin = to_int(need("kmin"), "kmin");
      c.kmax = to_int(need("kmax"), "kmax");
      break;
  }
  return c;
}

namespace {

int cmd_simulate(const std::string& path, const CLI::Option* seed_opt, std::uint64_t seed, std::ostream& out, std::ostream& err)
{
  auto kv = parse_config_text(read_file(path), sim_config_keys());
  SimConfig c = sim_config_from(kv);
  if (seed_opt->count())
    c.seed = seed;
  const double eta = kv.count("eta") ? to_real(kv.at("eta"), "eta") : 0.0;
  if (kv.count("eta") && (!(eta > 0) || c.scenario != Scenario::power_series || !c.measure.bounded()))
    throw ValidationError("config: eta needs eta > 0 and a bounded power-series scenario");
  const auto t0 = std::chrono::steady_clock::now();
  auto report = empirical_mise(c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json checks;
  bool se_ok = true;
  for (const auto& r : report.rows)
    se_ok = se_ok && (std::isnan(r.standard_error) || r.standard_error >= 0);
  checks["standard_error_nonnegative"] = se_ok;
  checks["decreasing_within_se"] = decreasing_within_se(report);
  if (c.replicates > 1) {
    int agree = 0, total = 0;
    bool bound_ok = true;
    const double kp = c.scenario == Scenario::deconv ? Kp(c.noise).value : NAN;
    for (const auto& r : report.rows) {
      const double exact = r.exact_bias_sq + r.exact_variance;
      if (!std::isnan(exact)) {
        ++total;
        agree += std::fabs(r.empirical_mise - exact) <= 3 * r.standard_error;
      }
      if (c.scenario == Scenario::deconv)
        bound_ok = bound_ok && r.n * r.empirical_mise <= kp / (2 * std::numbers::pi) + 3 * r.n * r.standard_error;
      if (c.scenario == Scenario::uniform) {
        ThetaPmf f(static_cast<std::size_t>(c.true_pmf.hi()), 0.0);
        for (std::int64_t t = c.true_pmf.lo(); t <= c.true_pmf.hi(); ++t)
          f[t - 1] = c.true_pmf(t);
        bound_ok = bound_ok && r.empirical_mise <= mise_bound_uniform(f, r.m, r.n) + 3 * r.standard_error;
      }
    }
    if (total > 0)
      checks["oracle_agreement_fraction"] = double(agree) / total;
    if (c.scenario == Scenario::deconv)
      checks["deconv_variance_bound"] = bound_ok;
    if (c.scenario == Scenario::uniform)
      checks["uniform_mise_bound"] = bound_ok;
  }
  nlohmann::json summary;
  summary["config"] = kv;
  summary["config"]["seed"] = std::to_string(c.seed);
  summary["wall_time_s"] = wall;
  summary["workers"] = worker_count();
  summary["checks"] = checks;
  summary["note"] = report.note;
  if (kv.count("eta")) {
    // w_n at m' = ceil(eta m) per row, for scanning the tail hypothesis.
    nlohmann::json w = nlohmann::json::array();
    for (const auto& r : report.rows) {
      const int mp = static_cast<int>(std::ceil(eta * r.m));
      w.push_back({ { "n", r.n }, { "m_prime", mp }, { "wn", wn(c.family, c.measure, mp, r.n).value } });
    }
    summary["wn"] = w;
  }

  const std::string target = kv.count("out") ? kv.at("out") : "";
  emit(target, report_csv(report), out);
  if (target.empty() || target == "-")
    err << summary.dump(2) << "\n";
  else
    write_file(target + ".summary.json", summary.dump(2) + "\n");
  return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Mixing density estimation for discrete mixtures", "demix" };
  app.require_subcommand(1);
  app.fallthrough();

  // poly
  auto* poly = app.add_subcommand("poly", "orthonormal polynomial coefficients Q_{k,l}");
  std::string measure = "legendre", poly_out;
  double pa = 0, pb = 1;
  int rate = 1, pm = 0;
  poly->add_option("--measure", measure, "legendre | interval | exp");
  poly->add_option("--a", pa);
  poly->add_option("--b", pb);
  poly->add_option("--rate", rate, "exp weight rate (1 or 2)");
  poly->add_option("--m", pm, "number of rows")->required();
  poly->add_option("--out", poly_out);

  // estimate
  auto* est = app.add_subcommand("estimate", "projection estimate from a histogram");
  Common ec;
  add_family(est, ec);
  int em = 0;
  std::string edata, eband = "fixed", eroute = "projection";
  double etau = 0, elam = 4.5, ealpha = 1;
  bool eclip = false;
  auto* em_opt = est->add_option("--m", em, "dimension of V_m");
  est->add_option("--data", edata, "histogram CSV")->required();
  est->add_option("--bandwidth", eband, "fixed | poisson | finite-r | halfline");
  auto* etau_opt = est->add_option("--tau", etau);
  est->add_option("--lambda1", elam);
  est->add_option("--alpha", ealpha);
  est->add_option("--route", eroute, "projection | gram");
  est->add_flag("--clip", eclip, "clip at 0 and renormalize (outside the estimator's analysis)");
  est->add_option("--out", ec.out);

  // deconv
  auto* dec = app.add_subcommand("deconv", "Fourier deconvolution on Z");
  std::string dnoise, ddata, dout;
  std::int64_t kmin = 0, kmax = 0;
  int grid = 8192;
  dec->add_option("--noise", dnoise, "noise CSV (k,prob)")->required();
  dec->add_option("--data", ddata, "histogram CSV (k,count)")->required();
  dec->add_option("--kmin", kmin)->required();
  dec->add_option("--kmax", kmax)->required();
  dec->add_option("--grid", grid, "Fourier grid size (even)");
  dec->add_option("--out", dout);

  // uniform
  auto* uni = app.add_subcommand("uniform", "discrete-uniform mixture estimate");
  std::string udata, uout, uband = "fixed";
  int um = 0;
  double utau = 1, ubeta = 0.25;
  auto* um_opt = uni->add_option("--m", um);
  uni->add_option("--data", udata)->required();
  uni->add_option("--bandwidth", uband, "fixed | uniform");
  uni->add_option("--tau", utau);
  uni->add_option("--beta", ubeta);
  uni->add_option("--out", uout);

  // bounds
  auto* bnd = app.add_subcommand("bounds", "minimax lower and upper bound values per m");
  Common bc;
  add_family(bnd, bc);
  double balpha = 2, bC = 1.5, bn = 1000, bK = 1;
  int br = 1;
  std::string scan = "1..12", bband;
  double btau = 0;
  bnd->add_option("--alpha", balpha, "u_m = (1+m)^-alpha");
  bnd->add_option("--C", bC);
  bnd->add_option("--r", br);
  bnd->add_option("--K", bK);
  bnd->add_option("--n", bn);
  bnd->add_option("--m-scan", scan, "lo..hi");
  bnd->add_option("--bandwidth", bband, "poisson | finite-r: evaluate only at m_n");
  auto* btau_opt = bnd->add_option("--tau", btau);
  double beta_scan = 0;
  auto* beta_opt = bnd->add_option("--eta", beta_scan, "adds w_n at m' = ceil(eta m)");
  bnd->add_option("--out", bc.out);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo MISE from a key=value config");
  std::string cfg;
  std::uint64_t sseed = 0;
  sim->add_option("--config", cfg)->required();
  auto* seed_opt = sim->add_option("--seed", sseed, "overrides the config seed");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (!app.got_subcommand(poly) && !app.got_subcommand(est) && !app.got_subcommand(dec) &&
        !app.got_subcommand(uni) && !app.got_subcommand(bnd) && !app.got_subcommand(sim))
      err << app.help();
    return 2;
  }

  try {
    if (app.got_subcommand(poly))
      return cmd_poly(measure, pa, pb, rate, pm, poly_out, out);

    if (app.got_subcommand(est)) {
      auto fam = family_from(ec.family, ec.shape);
      auto ms = measure_from(ec.a, ec.b);
      auto counts = parse_histogram(edata);
      const double n = static_cast<double>(counts.n());
      int m = em;
      if (eband != "fixed" || !em_opt->count()) {
        if (eband == "fixed")
          throw ValidationError("estimate: give --m or --bandwidth");
        SimConfig tmp;
        tmp.family = fam;
        tmp.measure = ms;
        tmp.m_rule.kind = rule_kind(eband);
        if (etau_opt->count())
          tmp.m_rule.tau = etau;
        tmp.m_rule.lambda1 = elam;
        tmp.m_rule.alpha = ealpha;
        m = resolve_m(tmp, n);
      }
      Estimate e;
      if (!ms.bounded()) {
        if (!fam.is_poisson())
          throw ValidationError("estimate: the half-line needs the Poisson family");
        e = estimate_halfline(counts, m);
      } else if (eroute == "gram") {
        e = estimate_gram(counts, Basis::build(fam, ms, m));
      } else if (eroute == "projection") {
        e = estimate_projection(counts, fam, ms, m);
      } else {
        throw ValidationError("estimate: unknown route '" + eroute + "'");
      }
      std::string s = "section,x,value\n";
      for (int k = 0; k < m; ++k)
        s += "coef," + std::to_string(k) + "," + num(e.coeffs[k]) + "\n";
      const double lo = ms.bounded() ? ms.a() : 0.0, hi = ms.bounded() ? ms.b() : 10.0;
      Density g = eclip ? clipped_density(e) : Density([&e](double t) { return e(t); });
      const std::string label = eclip ? "grid_clipped," : "grid,";
      for (int i = 0; i < 200; ++i) {
        const double t = lo + (hi - lo) * i / 199;
        s += label + num(t) + "," + num(g(t)) + "\n";
      }
      emit(ec.out, s, out);
      return 0;
    }

    if (app.got_subcommand(dec)) {
      auto noise = parse_noise(dnoise);
      auto counts = parse_integer_histogram(ddata);
      auto f = estimate_deconv(counts, noise, kmin, kmax, FourierGrid::make(grid));
      std::string s = "k,fhat\n";
      for (std::int64_t k = kmin; k <= kmax; ++k)
        s += std::to_string(k) + "," + num(f[k - kmin]) + "\n";
      emit(dout, s, out);
      return 0;
    }

    if (app.got_subcommand(uni)) {
      auto counts = parse_histogram(udata);
      int m = um;
      if (uband == "uniform")
        m = bandwidth_uniform(static_cast<double>(counts.n()), utau, ubeta);
      else if (uband != "fixed")
        throw ValidationError("uniform: unknown bandwidth '" + uband + "'");
      else if (!um_opt->count())
        throw ValidationError("uniform: give --m or --bandwidth uniform");
      auto f = estimate_uniform(counts, m);
      std::string s = "theta,fhat\n";
      for (int k = 1; k <= m; ++k)
        s += std::to_string(k) + "," + num(f[k - 1]) + "\n";
      emit(uout, s, out);
      return 0;
    }

    if (app.got_subcommand(bnd)) {
      auto fam = family_from(bc.family, bc.shape);
      auto ms = MeasureSpec::interval(bc.a, bc.b);
      int lo = 0, hi = 0;
      if (!bband.empty()) {
        if (bband == "poisson")
          lo = hi = poisson_mn(bn, btau_opt->count() ? btau : 1.0);
        else if (bband == "finite-r")
          lo = hi = finiteR_rule(fam, bc.a, bc.b, bn, btau_opt->count() ? std::optional<double>(btau)
                                                                          : std::nullopt)
                      .m_n;
        else
          throw ValidationError("bounds: unknown bandwidth '" + bband + "'");
      } else {
        const auto dots = scan.find("..");
        if (dots == std::string::npos)
          throw ValidationError("--m-scan must look like lo..hi");
        lo = static_cast<int>(to_int(scan.substr(0, dots), "m-scan"));
        hi = static_cast<int>(to_int(scan.substr(dots + 2), "m-scan"));
      }
      if (lo < std::max(br, 0) || hi < lo)
        throw ValidationError("--m-scan must satisfy r <= lo <= hi");
      auto u = SmoothnessSeq::power(balpha);
      auto f0 = smooth_density_factory(fam, ms, u, br, bC);
      Density f0d = f0.as_density();
      ClassSpec spec{ u, bC, br, bK, f0d };
      // Enclosing class for the upper bound: f∞ = f0, K' = 1 + K, C' = C + C0.
      const double Kp1 = 1 + bK, Cp = bC + f0.class_constant;
      const bool with_wn = beta_opt->count() > 0;
      if (with_wn && !(beta_scan > 0))
        throw ValidationError("bounds: --eta must be positive");
      std::string s = with_wn ? "m,lower,upper,m_prime,wn\n" : "m,lower,upper\n";
      for (int m = lo; m <= hi; ++m) {
        auto big = Basis::build(fam, ms, m + 2);
        auto small = Basis::build(fam, ms, m);
        s += std::to_string(m) + "," + num(lower_bound_rhs(f0d, spec, *big, m, bn)) + "," +
             num(upper_bound_rhs(f0d, Kp1, u, Cp, *small, bn));
        if (with_wn) {
          const int mp = static_cast<int>(std::ceil(beta_scan * m));
          s += "," + std::to_string(mp) + "," + num(wn(fam, ms, mp, bn).value);
        }
        s += "\n";
      }
      emit(bc.out, s, out);
      return 0;
    }

    if (app.got_subcommand(sim))
      return cmd_simulate(cfg, seed_opt, sseed, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

int run(int argc, char** argv)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

} // namespace demix
