#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "conecount/counting.hpp"
#include "conecount/enumeration.hpp"
#include "conecount/experiments.hpp"
#include "conecount/geometry.hpp"
#include "conecount/group.hpp"
#include "conecount/parallel.hpp"
#include "conecount/quadform.hpp"
#include "conecount/report.hpp"
#include "conecount/spectral.hpp"
#include "conecount/valdist.hpp"

namespace conecount::cli {

namespace {

struct Common {
  int threads = 0;
  std::uint64_t seed = 0;
  std::string out;
};

std::string joined(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Resolves --seed, drawing one from entropy when omitted. The seed is always reported.
std::uint64_t resolve_seed(Common& c, const CLI::App* sub, std::ostream& err) {
  if (sub->get_option("--seed")->count() == 0) {
    c.seed = entropy_seed();
    err << "seed=" << c.seed << "\n";
  }
  return c.seed;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

void emit_json(nlohmann::json doc, RunManifest m, const std::string& path, std::ostream& out) {
  m.finished = utc_timestamp();
  attach_manifest(doc, m);
  emit(doc.dump(2) + "\n", path, out);
}

nlohmann::json report_json(const CountReport& r) {
  nlohmann::json j = {{"count", r.count},
                      {"main_term", r.main_term},
                      {"discrepancy", r.discrepancy},
                      {"relative_error", r.relative_error}};
  for (const auto& [k, v] : r.meta) j[k] = v;
  return j;
}

EllipsoidForm require_ellipsoid(const FormSpec& f) {
  if (!f.ellipsoid) throw std::invalid_argument("form " + f.label + " is not of the shape diag(A, -1)");
  return *f.ellipsoid;
}

KappaEstimate resolve_kappa(const std::string& spec, const EllipsoidForm& E, double T_default, double kappa_T, int threads) {
  if (spec.empty() || spec == "auto") return estimate_kappa(E, kappa_T > 0 ? kappa_T : T_default, threads);
  return supplied_kappa(E.n, static_cast<double>(parse_rational(spec)));
}

Intervals parse_intervals(const std::string& text) {
  Intervals out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    const auto comma = part.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("interval '" + part + "' must be a,b");
    const double a = static_cast<double>(parse_rational(part.substr(0, comma)));
    const double b = static_cast<double>(parse_rational(part.substr(comma + 1)));
    if (!(a > 0 && b > a)) throw std::invalid_argument("intervals need 0 < a < b");
    out.emplace_back(a, b);
  }
  if (out.empty()) throw std::invalid_argument("empty interval list");
  return out;
}

Eigen::MatrixXd parse_g(const std::string& spec, int n) {
  if (spec == "id") return identity_element(n).m;
  if (spec.rfind("random:", 0) == 0) {
    Rng rng(std::stoull(spec.substr(7)));
    return random_element(n, rng).m;
  }
  throw std::invalid_argument("--g must be id or random:<seed>");
}

Eigen::MatrixXd parse_h(const std::string& spec, int m) {
  if (spec == "id") return Eigen::MatrixXd::Identity(m, m);
  if (spec.rfind("random:", 0) == 0) {
    Rng rng(std::stoull(spec.substr(7)));
    return random_h(m, rng);
  }
  throw std::invalid_argument("--h must be id or random:<seed>");
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counting rational points on light cones and the Diophantine experiments built on them", "conecount"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  RunManifest manifest;
  manifest.command_line = joined(argc, argv);
  manifest.started = utc_timestamp();
  Common c;
  auto common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--threads", c.threads, "worker threads, 0 = all logical cores")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", c.out, "output file (stdout when omitted)");
    if (with_seed) sub->add_option("--seed", c.seed, "master seed (drawn from entropy and printed when omitted)");
  };

  std::string form = "standard:2";
  long long qmax = 0;
  auto* en = app.add_subcommand("enumerate", "list primitive cone points up to a denominator");
  en->add_option("--form", form, "standard:<n> or a form file")->capture_default_str();
  en->add_option("--qmax", qmax, "largest denominator")->required()->check(CLI::PositiveNumber);
  common(en, false);

  std::string alpha, kappa_spec = "auto";
  double r = 0.0, T = 0.0, kappa_T = 0.0;
  auto* cc = app.add_subcommand("count-cap", "count rational points in a cap of the ellipsoid");
  cc->add_option("--form", form)->capture_default_str();
  cc->add_option("--alpha", alpha, "unit vector as comma separated rationals (normalized)")->required();
  cc->add_option("--r", r, "chordal radius")->required()->check(CLI::PositiveNumber);
  cc->add_option("--T", T, "height bound q < T")->required()->check(CLI::PositiveNumber);
  cc->add_option("--kappa", kappa_spec, "kappa value or auto")->capture_default_str();
  cc->add_option("--kappa-T", kappa_T, "height for the auto kappa estimate (default T)");
  common(cc, false);

  std::string psi_spec = "pow:c=1,lambda=0.8";
  int trials = 1;
  auto* ck = app.add_subcommand("count-khintchine", "count psi-approximations q < T for random or given alpha");
  ck->add_option("--form", form)->capture_default_str();
  ck->add_option("--psi", psi_spec, "pow:c=,lambda= | logpow:c=,lambda= | const:c= | spow:c=,shift=,lambda=")
      ->capture_default_str();
  ck->add_option("--T", T)->required()->check(CLI::PositiveNumber);
  ck->add_option("--alpha", alpha, "fixed alpha (otherwise random per trial)");
  ck->add_option("--trials", trials)->check(CLI::PositiveNumber)->capture_default_str();
  ck->add_option("--kappa", kappa_spec)->capture_default_str();
  ck->add_option("--kappa-T", kappa_T);
  common(ck, true);

  int n = 2;
  std::string region_spec, mode = "exact";
  auto* me = app.add_subcommand("measure", "cone or sphere measure of a region");
  me->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  me->add_option("--region", region_spec, "cap:<r>@<alpha> | sector:<T>,<r>@<alpha> | region:psi=<spec>,T=<T>")->required();
  me->add_option("--mode", mode)->check(CLI::IsMember({"exact", "leading"}))->capture_default_str();
  common(me, false);

  std::string vkind = "linear", gspec = "id", hspec = "id", target;
  int m = 1, p = 2, q = 1;
  double d = 2.0;
  std::size_t samples = 200000;
  CLI::Option* form_opt = nullptr;
  auto* vd = app.add_subcommand("valdist", "count cone points whose image lands in a target, against the volume prediction");
  vd->set_help_flag("--help", "Print this help message and exit");
  vd->add_option("--kind", vkind)->check(CLI::IsMember({"linear", "homog"}))->capture_default_str();
  vd->add_option("--n", n)->required()->check(CLI::Range(3, 64));
  form_opt = vd->add_option("--form", form, "defaults to standard:<n>");
  vd->add_option("--m", m, "rank of the linear map")->capture_default_str();
  vd->add_option("--d", d, "degree of the homogeneous form")->capture_default_str();
  vd->add_option("--p", p)->capture_default_str();
  vd->add_option("--q", q)->capture_default_str();
  vd->add_option("--g", gspec, "id or random:<seed>")->capture_default_str();
  vd->add_option("--h", hspec, "id or random:<seed>")->capture_default_str();
  vd->add_option("--target", target, "box:a,b;... or interval:a,b")->required();
  vd->add_option("--T", T)->required()->check(CLI::PositiveNumber);
  vd->add_option("--samples", samples, "Monte Carlo samples for the volume constant")->capture_default_str();
  vd->add_option("--kappa", kappa_spec)->capture_default_str();
  vd->add_option("--kappa-T", kappa_T, "height for the auto kappa estimate (default 150)");
  common(vd, true);

  double s = 0.0, cap_r = 2.0, cap_r2 = -1.0;
  std::string rho = "1,2", rho2;
  int dmax = 64;
  auto* sp = app.add_subcommand("spectral", "truncated M_{f,f'}(s) for separable sector functions");
  sp->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  sp->add_option("--s", s, "real s in (n/2, n)")->required();
  sp->add_option("--rho", rho, "radial intervals a,b;c,d")->capture_default_str();
  sp->add_option("--cap-r", cap_r, "cap radius about alpha_0 (>= 2 is the whole sphere)")->capture_default_str();
  sp->add_option("--rho2", rho2, "radial intervals of f' (default: same as f)");
  sp->add_option("--cap-r2", cap_r2, "cap radius of f' (default: same as f)");
  sp->add_option("--dmax", dmax, "largest harmonic degree summed")->capture_default_str();
  common(sp, false);

  std::string config;
  auto* ex = app.add_subcommand("experiment", "run a seeded experiment campaign from a key = value config");
  ex->add_option("--config", config)->required()->check(CLI::ExistingFile);
  common(ex, true);
  ex->get_option("--out")->description("output directory for trials.csv, fit.json and verdict.txt (default .)");

  bool as_json = false;
  auto* co = app.add_subcommand("constants", "cap constant and predicted exponents");
  co->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  co->add_flag("--json", as_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    manifest.threads = resolve_threads(c.threads);
    if (en->parsed()) {
      const FormSpec f = load_form(form);
      const EllipsoidForm E = require_ellipsoid(f);
      const auto pts = enumerate_primitive(E, qmax, c.threads);
      std::string csv = "q";
      for (int i = 1; i <= E.n + 2; ++i) csv += ",v_" + std::to_string(i);
      csv += "\n";
      for (const auto& pt : pts) {
        csv += pt.q.str();
        for (const auto& x : pt.v) csv += "," + x.str();
        csv += "\n";
      }
      emit(csv, c.out, out);
      return 0;
    }
    if (cc->parsed()) {
      const FormSpec f = load_form(form);
      const EllipsoidForm E = require_ellipsoid(f);
      manifest.form_fingerprint = f.space.fingerprint();
      const Eigen::VectorXd a = parse_unit_vector(alpha, E.n);
      const KappaEstimate k = resolve_kappa(kappa_spec, E, T, kappa_T, c.threads);
      const CountReport rep = count_cap(E, a, r, T, k, c.threads);
      nlohmann::json doc = report_json(rep);
      doc["query"] = {{"form", f.label}, {"alpha", alpha}, {"r", r}, {"T", T}};
      doc["kappa_source"] = k.source;
      doc["kappa"] = k.kappa;
      emit_json(doc, manifest, c.out, out);
      return 0;
    }
    if (ck->parsed()) {
      const FormSpec f = load_form(form);
      const EllipsoidForm E = require_ellipsoid(f);
      manifest.form_fingerprint = f.space.fingerprint();
      manifest.seed = resolve_seed(c, ck, err);
      const Psi psi = Psi::parse(psi_spec);
      const KappaEstimate k = resolve_kappa(kappa_spec, E, T, kappa_T, c.threads);
      nlohmann::json rows = nlohmann::json::array();
      const int count = alpha.empty() ? trials : 1;
      for (int t = 0; t < count; ++t) {
        const std::uint64_t ts = derive_seed(manifest.seed, 0, static_cast<std::uint64_t>(t));
        Rng rng(ts);
        const Eigen::VectorXd a = alpha.empty() ? sample_sphere(E.n, rng) : parse_unit_vector(alpha, E.n);
        nlohmann::json row = report_json(count_khintchine(E, a, psi, T, k, c.threads));
        row["trial"] = t;
        row["alpha"] = std::vector<double>(a.data(), a.data() + a.size());
        if (alpha.empty()) row["seed"] = ts;
        rows.push_back(row);
      }
      nlohmann::json doc;
      doc["query"] = {{"form", f.label}, {"psi", psi.describe()}, {"T", T}, {"trials", count}};
      doc["J_psi"] = j_sum(psi, E.n, T);
      doc["I_psi"] = i_sum(psi, E.n, T);
      doc["divergent"] = psi_divergent(psi, E.n);
      doc["kappa_source"] = k.source;
      doc["kappa"] = k.kappa;
      doc["trials"] = rows;
      emit_json(doc, manifest, c.out, out);
      return 0;
    }
    if (me->parsed()) {
      const Region region = parse_region(region_spec, n);
      const bool exact = mode == "exact";
      double value = 0.0;
      std::string what;
      std::visit(
          [&](const auto& reg) {
            using R = std::decay_t<decltype(reg)>;
            if constexpr (std::is_same_v<R, SphericalCap>) {
              value = exact ? cap_measure_exact(n, reg.radius) : cap_measure_leading(n, reg.radius);
              what = "normalized sphere measure";
            } else if constexpr (std::is_same_v<R, Sector>) {
              value = sector_measure(n, reg.T, reg.cap.radius, exact ? MeasureMode::exact : MeasureMode::leading);
              what = "cone measure";
            } else {
              value = region_measure(reg.psi, n, reg.T, exact ? RegionMode::quadrature : RegionMode::leading);
              what = "cone measure";
            }
          },
          region);
      nlohmann::json doc = {{"region", region_spec}, {"n", n}, {"mode", mode}, {"measure", value}, {"kind", what}};
      emit_json(doc, manifest, c.out, out);
      return 0;
    }
    if (vd->parsed()) {
      if (form_opt->count() == 0) form = "standard:" + std::to_string(n);
      const FormSpec f = load_form(form);
      if (f.space.n != n) throw std::invalid_argument("--n does not match the form dimension");
      manifest.form_fingerprint = f.space.fingerprint();
      manifest.seed = resolve_seed(c, vd, err);
      KappaEstimate k;
      if (kappa_spec.empty() || kappa_spec == "auto")
        k = estimate_kappa(require_ellipsoid(f), kappa_T > 0 ? kappa_T : 150.0, c.threads);
      else
        k = supplied_kappa(n, static_cast<double>(parse_rational(kappa_spec)));
      const Eigen::MatrixXd g = parse_g(gspec, n);
      nlohmann::json doc;
      CountReport rep;
      MonteCarloValue V;
      if (vkind == "linear") {
        const LinearMapOnCone L = LinearMapOnCone::classified(f.space, m, g, parse_h(hspec, m));
        const BoxUnion omega = parse_box(target, m);
        V = v_L(L, samples, derive_seed(manifest.seed, 1), c.threads);
        rep = count_linear(f.space, L, omega, T, k.omega, V.value, c.threads);
        doc["kernel_indefinite"] = kernel_indefinite(f.space, L.matrix);
        doc["V_L"] = {{"value", V.value}, {"stderr", V.stderr_}, {"samples", V.samples}};
      } else {
        const HomogeneousFormOnCone F = HomogeneousFormOnCone::make(f.space, d, p, q, g, parse_h(hspec, p + q));
        const Interval I = parse_interval(target);
        V = v_F(F, samples, derive_seed(manifest.seed, 1), c.threads);
        rep = count_homog(f.space, F, I, T, k.omega, V.value, c.threads);
        doc["V_F"] = {{"value", V.value}, {"stderr", V.stderr_}, {"samples", V.samples}};
        doc["error_exponent"] = homog_error_exponent(d, p + q);
      }
      doc.update(report_json(rep));
      doc["query"] = {{"kind", vkind}, {"form", f.label}, {"g", gspec}, {"h", hspec}, {"target", target}, {"T", T}};
      doc["kappa_source"] = k.source;
      doc["omega_hat"] = k.omega;
      emit_json(doc, manifest, c.out, out);
      return 0;
    }
    if (sp->parsed()) {
      SeparableFunction f{n, parse_intervals(rho), cap_r};
      SeparableFunction g{n, rho2.empty() ? f.rho : parse_intervals(rho2), cap_r2 < 0 ? cap_r : cap_r2};
      const MValue M = m_ff(f, g, s, dmax);
      nlohmann::json doc = {{"n", n},          {"s", s},           {"M", M.value}, {"tail_bound", M.tail_bound},
                            {"D_max", M.D_max}, {"m_f", f.measure()}, {"m_g", g.measure()}};
      emit_json(doc, manifest, c.out, out);
      return 0;
    }
    if (ex->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::load(config);
      if (ex->get_option("--seed")->count()) cfg.values["seed"] = std::to_string(c.seed);
      else if (!cfg.has("seed")) cfg.values["seed"] = std::to_string(resolve_seed(c, ex, err));
      if (ex->get_option("--threads")->count()) cfg.values["threads"] = std::to_string(c.threads);
      manifest.seed = std::stoull(cfg.get("seed"));
      manifest.threads = resolve_threads(static_cast<int>(cfg.get_int("threads", 0)));
      if (cfg.has("form") || cfg.kind() != "sum_integral")
        manifest.form_fingerprint = load_form(cfg.get("form", cfg.kind() == "valdist" ? "standard:3" : "standard:2")).space.fingerprint();
      const ExperimentResult res = run_experiment(cfg);
      manifest.finished = utc_timestamp();
      const std::string dir = c.out.empty() ? "." : c.out;
      write_outputs(res, dir, manifest);
      out << res.verdict_text();
      return res.passed() ? 0 : 2;
    }
    if (co->parsed()) {
      const ExponentTable t = predicted_exponents(n);
      nlohmann::json doc = {{"n", n},
                            {"c_cap", c_cap(n)},
                            {"s_n", t.s_n},
                            {"cq_positive", t.cq_positive},
                            {"beta", t.beta},
                            {"beta_alt", t.beta_alt},
                            {"cap_r_exponent", t.cap_r_exponent},
                            {"cap_T_exponent", t.cap_T_exponent},
                            {"generic_exponent", t.generic_exponent},
                            {"khintchine_exponent", t.khintchine_exponent},
                            {"d_full", t.d_full},
                            {"full_delta_exponent", t.full_delta_exponent},
                            {"full_mass_exponent", t.full_mass_exponent},
                            {"d_parabolic", t.d_parabolic},
                            {"parabolic_mass_exponent", t.parabolic_mass_exponent}};
      if (as_json) {
        emit_json(doc, manifest, "", out);
      } else {
        out << "c_cap(" << n << ")=" << format_double(c_cap(n)) << "\n";
        for (auto it = doc.begin(); it != doc.end(); ++it) {
          if (it.key() == "n" || it.key() == "c_cap") continue;
          out << it.key() << "=" << (it->is_number_float() ? format_double(it->get<double>()) : it->dump()) << "\n";
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace conecount::cli
