#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wlab/bergman.hpp"
#include "wlab/json_io.hpp"
#include "wlab/polyconc.hpp"
#include "wlab/stability.hpp"

namespace fs = std::filesystem;
using namespace wlab;

namespace {

// exit codes: 0 all pass, 1 usage error, 2 mathematical assertion failed,
// 3 I/O error
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kMathFail = 2;
constexpr int kIoFail = 3;

struct MathFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void log_json(const std::string& event, const std::string& detail) {
  json j{{"level", "info"}, {"event", event}, {"detail", detail}};
  std::fprintf(stderr, "%s\n", j.dump().c_str());
}

// write-to-temp then rename, so readers never observe a partial report
void atomic_write(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::ios_base::failure("cannot open " + tmp.string());
    os << content;
    if (!os.good()) throw std::ios_base::failure("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
  log_json("report_written", path);
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("WEHRL_LAB_SEED")) {
    try {
      std::size_t pos = 0;
      const std::uint64_t v = std::stoull(env, &pos);
      if (pos != std::string(env).size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("WEHRL_LAB_SEED must be an unsigned integer");
    }
  }
  return 1;
}

// grammar: coherent | pure | mixed:full | mixed:<rank>
DensityOperator make_state(const std::string& spec, const SpaceSignature& sig,
                           std::uint64_t seed) {
  if (spec == "coherent")
    return DensityOperator::coherent(random_unit_vector(sig.N, derive_seed(seed, 11)), sig);
  if (spec == "pure")
    return DensityOperator::pure(
        StateVector(sig, random_unit_vector(static_cast<int>(sig.dim), derive_seed(seed, 12))));
  if (spec == "mixed:full") return DensityOperator::maximally_mixed(sig);
  if (spec.rfind("mixed:", 0) == 0) {
    int rank = 0;
    try {
      rank = std::stoi(spec.substr(6));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad state spec '" + spec + "'");
    }
    return random_density(sig, rank, derive_seed(seed, 13));
  }
  throw std::invalid_argument("unknown state spec '" + spec +
                              "' (expected coherent|pure|mixed:full|mixed:<rank>)");
}

std::int64_t parse_samples(const std::string& s) {
  try {
    const double v = std::stod(s);
    if (!(v >= 1.0) || v > 9.0e15) throw std::invalid_argument("");
    return static_cast<std::int64_t>(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad sample count '" + s + "'");
  }
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct CommonOpts {
  int N = 2;
  int M = 1;
  std::string phi = "power:2";
  std::string state = "mixed:full";
  std::string samples = "100000";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int n_starts = 16;
  int threads = 1;
  std::string format;  // json or csv; each command accepts its native one
  std::string out;
};

void check_format(const CommonOpts& o, const std::string& native) {
  if (!o.format.empty() && o.format != native)
    throw std::invalid_argument("this command emits " + native + " only");
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_state = true) {
  cmd->add_option("--n,-N", o.N, "ambient dimension N (>= 2)");
  cmd->add_option("--m,-M", o.M, "tensor power M (>= 1)");
  if (with_state) {
    cmd->add_option("--phi", o.phi, "convex functional: power:<q>|xlogx|pwl:<t,v;...>");
    cmd->add_option("--state", o.state, "state spec: coherent|pure|mixed:full|mixed:<rank>");
  }
  cmd->add_option("--samples", o.samples, "Monte-Carlo sample count (accepts 1e6 style)");
  cmd->add_option("--seed", o.seed, "master seed (default: WEHRL_LAB_SEED or 1)")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--n-starts", o.n_starts, "optimizer restarts (>= 8)");
  cmd->add_option("--threads", o.threads, "worker cap; results do not depend on it");
  cmd->add_option("--format", o.format, "report format; validated against the command");
  cmd->add_option("--out,-o", o.out, "output path (default: stdout)");
}

std::uint64_t effective_seed(const CommonOpts& o) { return o.seed_set ? o.seed : default_seed(); }

StabilityReport run_stability(const CommonOpts& o, std::uint64_t seed) {
  const auto sig = SpaceSignature::create(o.N, o.M);
  const auto phi = ConvexFunctional::parse(o.phi);
  const auto rho = make_state(o.state, sig, seed);
  VerifyOptions vo;
  vo.n_starts = o.n_starts;
  vo.threads = o.threads;
  StabilityReport rep = verify_stability(rho, phi, parse_samples(o.samples), seed, vo);
  return rep;
}

int emit_report(const StabilityReport& rep, const std::string& out, const json* extra = nullptr) {
  json j = to_json(rep);
  if (extra) j["fit"] = *extra;
  atomic_write(out, j.dump(2) + "\n");
  if (!rep.pass) {
    for (const auto& f : rep.failures) log_json("assertion_failed", f);
    return kMathFail;
  }
  return kOk;
}

const std::vector<std::pair<int, int>> kDefaultGrid = {{2, 1}, {2, 2}, {2, 3},
                                                       {3, 1}, {3, 2}, {4, 2}};

std::vector<std::pair<int, int>> parse_grid(const std::string& spec) {
  if (spec == "default") return kDefaultGrid;
  std::vector<std::pair<int, int>> cells;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos)
      throw std::invalid_argument("grid cell '" + item + "' must be '<N>x<M>'");
    cells.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
  }
  if (cells.empty()) throw std::invalid_argument("empty grid spec");
  return cells;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for coherent-state entropy inequalities on CP^(N-1)"};
  app.require_subcommand(1);
  // goes before the subcommand; file keys live in a [subcommand] section and
  // explicit flags win on conflict
  app.set_config("--config", "", "key=value file with a [subcommand] section");

  // dims
  auto* dims = app.add_subcommand("dims", "print the symmetric space dimension");
  CommonOpts dims_o;
  dims->add_option("--n,-N", dims_o.N, "ambient dimension");
  dims->add_option("--m,-M", dims_o.M, "tensor power");

  // rand-state
  auto* rand_cmd = app.add_subcommand("rand-state", "emit a seeded random density operator");
  CommonOpts rand_o;
  int rand_rank = 1;
  bool rand_uniform = false;
  add_common(rand_cmd, rand_o, false);
  rand_cmd->add_option("--rank", rand_rank, "spectral rank in [1, dim]");
  rand_cmd->add_flag("--uniform", rand_uniform, "force uniform spectral weights");

  // deficit / stability
  auto* deficit_cmd = app.add_subcommand("deficit", "entropy deficit report for one state");
  CommonOpts deficit_o;
  add_common(deficit_cmd, deficit_o);
  auto* stab_cmd = app.add_subcommand("stability", "full stability report for one state");
  CommonOpts stab_o;
  double fit_t0 = 0.0;
  add_common(stab_cmd, stab_o);
  stab_cmd->add_option("--fit-t0", fit_t0,
                       "also fit the super-level comparison constant on [t0, T)");

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "sweep a (N,M) grid and emit a CSV table");
  CommonOpts scan_o;
  std::string scan_grid = "default";
  int scan_reps = 5;
  add_common(scan_cmd, scan_o, false);
  scan_cmd->add_option("--grid", scan_grid, "default or '<N>x<M>,<N>x<M>,...'");
  scan_cmd->add_option("--reps", scan_reps, "seeds per (cell, state kind)");

  // faber-krahn
  auto* fk_cmd = app.add_subcommand("faber-krahn", "concentration check for a seeded polynomial");
  CommonOpts fk_o;
  bool fk_coherent = false;
  add_common(fk_cmd, fk_o, false);
  fk_cmd->add_flag("--coherent", fk_coherent,
                   "use a coherent polynomial and its own super-level set");

  // rearrange
  auto* re_cmd = app.add_subcommand("rearrange", "empirical decreasing rearrangement as CSV");
  CommonOpts re_o;
  add_common(re_cmd, re_o);

  // bergman
  auto* bg_cmd = app.add_subcommand("bergman", "disk-space contractive checks");
  CommonOpts bg_o;
  double bg_p = 2.0, bg_alpha = 2.0, bg_theta = 0.0;
  double bg_wre = 0.4, bg_wim = -0.2;
  int bg_degree = 4, bg_ball = 1;
  add_common(bg_cmd, bg_o, false);
  bg_cmd->add_option("--p", bg_p, "integrability exponent p > 0");
  bg_cmd->add_option("--alpha", bg_alpha, "weight exponent alpha > 1");
  bg_cmd->add_option("--phi", bg_o.phi, "convex functional");
  bg_cmd->add_option("--degree", bg_degree, "seeded polynomial degree");
  bg_cmd->add_option("--w-re", bg_wre, "extremal parameter, real part");
  bg_cmd->add_option("--w-im", bg_wim, "extremal parameter, imaginary part");
  bg_cmd->add_option("--theta", bg_theta, "extremal phase");
  bg_cmd->add_option("--ball-dim", bg_ball,
                     "exploratory ball dimension (>= 2 disables pass/fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (dims->parsed()) {
      std::printf("%lld\n", static_cast<long long>(dim_symmetric(dims_o.N, dims_o.M)));
      return kOk;
    }

    if (rand_cmd->parsed()) {
      check_format(rand_o, "json");
      const auto sig = SpaceSignature::create(rand_o.N, rand_o.M);
      const auto rho = random_density(sig, rand_rank, effective_seed(rand_o), rand_uniform);
      atomic_write(rand_o.out, to_json(rho).dump(2) + "\n");
      return kOk;
    }

    if (deficit_cmd->parsed()) {
      check_format(deficit_o, "json");
      const StabilityReport rep = run_stability(deficit_o, effective_seed(deficit_o));
      return emit_report(rep, deficit_o.out);
    }

    if (stab_cmd->parsed()) {
      check_format(stab_o, "json");
      const std::uint64_t seed = effective_seed(stab_o);
      const StabilityReport rep = run_stability(stab_o, seed);
      if (fit_t0 > 0.0) {
        const auto sig = SpaceSignature::create(stab_o.N, stab_o.M);
        const auto rho = make_state(stab_o.state, sig, seed);
        const ConcentrationFit fit = fit_concentration(rho, fit_t0, parse_samples(stab_o.samples),
                                                       seed, stab_o.n_starts, stab_o.threads);
        json jfit{{"t0", fit.t0}, {"T0", fit.T0}, {"C0_hat", fit.C0_hat}};
        json grid = json::array();
        for (const auto& row : fit.grid)
          grid.push_back({{"t", row.t}, {"mu", row.mu}, {"mu0_scaled", row.mu0_scaled}});
        jfit["grid"] = grid;
        return emit_report(rep, stab_o.out, &jfit);
      }
      return emit_report(rep, stab_o.out);
    }

    if (scan_cmd->parsed()) {
      check_format(scan_o, "csv");
      const std::uint64_t seed = effective_seed(scan_o);
      const auto cells = parse_grid(scan_grid);
      const std::int64_t n = parse_samples(scan_o.samples);
      const std::vector<std::string> kinds = {"coherent", "pure", "mixed:2", "mixed:full"};
      std::ostringstream csv;
      csv << "N,M,phi,state,seed,n_samples,T,D,deficit,mc_error,lower_bound,ratio,pass\n";
      bool all_pass = true;
      const std::vector<std::string> phis = {"power:2", "power:3", "xlogx", "pwl:0,0;0.5,0;1,0.5"};
      for (const auto& [N, M] : cells) {
        const auto sig = SpaceSignature::create(N, M);
        for (const auto& kind : kinds) {
          if (kind == "mixed:2" && sig.dim < 2) continue;
          for (int rep_i = 0; rep_i < scan_reps; ++rep_i) {
            const std::uint64_t s =
                derive_seed(seed, static_cast<std::uint64_t>(N * 1000003 + M * 10007 + rep_i));
            const auto rho = make_state(kind, sig, s);
            const std::vector<double> u = husimi_samples(rho, n, derive_seed(s, 101),
                                                         scan_o.threads);
            const SupResult sup = sup_husimi(rho, scan_o.n_starts, derive_seed(s, 202));
            const double D = trace_distance(rho, scan_o.n_starts, derive_seed(s, 303));
            for (const auto& phi_name : phis) {
              const auto phi = ConvexFunctional::parse(phi_name);
              const MeanResult lhs = phi_mean(phi, u);
              const double rhs = rhs_closed_form(phi, sig).value;
              StabilityReport rep;
              rep.deficit = rhs - lhs.value;
              rep.mc_error = lhs.mc_error;
              rep.T = std::min(sup.T, 1.0);
              rep.D = D;
              rep.lower_bound = stability_lower_bound(rep.T, phi, sig);
              rep.ratio = D > 1e-7 ? rep.deficit / (D * D)
                                   : std::numeric_limits<double>::infinity();
              const bool ok = rep.deficit >= -3.0 * rep.mc_error - 1e-10 &&
                              rep.deficit >= rep.lower_bound - 3.0 * rep.mc_error - 1e-10 &&
                              D * D <= 4.0 * (1.0 - rep.T) + 1e-9;
              all_pass = all_pass && ok;
              csv << N << ',' << M << ',' << phi_name << ',' << kind << ',' << s << ',' << n
                  << ',' << fmt17(rep.T) << ',' << fmt17(rep.D) << ',' << fmt17(rep.deficit)
                  << ',' << fmt17(rep.mc_error) << ',' << fmt17(rep.lower_bound) << ','
                  << fmt17(rep.ratio) << ',' << (ok ? "true" : "false") << '\n';
            }
          }
        }
      }
      atomic_write(scan_o.out, csv.str());
      return all_pass ? kOk : kMathFail;
    }

    if (fk_cmd->parsed()) {
      check_format(fk_o, "json");
      const std::uint64_t seed = effective_seed(fk_o);
      const auto sig = SpaceSignature::create(fk_o.N, fk_o.M);
      const std::int64_t n = parse_samples(fk_o.samples);
      ChartPolynomial F = [&]() {
        if (fk_coherent) {
          const Vector v = random_unit_vector(sig.N, derive_seed(seed, 21));
          return state_to_polynomial(coherent_coefficients(v, sig));
        }
        return state_to_polynomial(
            StateVector(sig, random_unit_vector(static_cast<int>(sig.dim),
                                                derive_seed(seed, 22))));
      }();
      RegionSpec region = [&]() {
        if (fk_coherent) {
          auto eval = std::make_shared<HusimiEvaluator>(
              DensityOperator::pure(polynomial_to_state(F)));
          return RegionSpec::superlevel(eval, 0.35);
        }
        Rng rng(derive_seed(seed, 23));
        Vector center(sig.N - 1);
        for (int i = 0; i < sig.N - 1; ++i) center(i) = 0.7 * rng.complex_normal();
        return RegionSpec::euclidean_ball(center, 0.5 + rng.uniform01());
      }();
      const ConcentrationReport rep = concentration(F, region, n, derive_seed(seed, 24),
                                                    fk_o.threads);
      json j = to_json(rep);
      j["N"] = sig.N;
      j["M"] = sig.M;
      j["seed"] = seed;
      j["n_samples"] = n;
      j["bound_quadrature"] = to_json(faber_krahn_rhs(rep.nu, sig));
      atomic_write(fk_o.out, j.dump(2) + "\n");
      return rep.pass ? kOk : kMathFail;
    }

    if (re_cmd->parsed()) {
      check_format(re_o, "csv");
      const std::uint64_t seed = effective_seed(re_o);
      const auto sig = SpaceSignature::create(re_o.N, re_o.M);
      const auto rho = make_state(re_o.state, sig, seed);
      const auto dist = empirical_distribution(rho, parse_samples(re_o.samples),
                                               derive_seed(seed, 101), re_o.threads);
      std::ostringstream csv;
      dist.write_csv(csv);
      atomic_write(re_o.out, csv.str());
      return kOk;
    }

    if (bg_cmd->parsed()) {
      check_format(bg_o, "json");
      const std::uint64_t seed = effective_seed(bg_o);
      const auto phi = ConvexFunctional::parse(bg_o.phi);
      if (bg_ball >= 2) {
        Vector w = 0.5 * random_unit_vector(bg_ball, derive_seed(seed, 31));
        const auto rep = ball_explore(bg_ball, bg_p, bg_alpha, phi, w, bg_theta,
                                      parse_samples(bg_o.samples), derive_seed(seed, 32));
        json j{{"ball_dim", rep.ball_dim}, {"lhs", rep.lhs},         {"lhs_err", rep.lhs_err},
               {"rhs", rep.rhs},           {"rhs_err", rep.rhs_err}, {"exploratory", true}};
        atomic_write(bg_o.out, j.dump(2) + "\n");
        return kOk;
      }
      const BergmanConfig cfg(bg_p, bg_alpha);
      const Complex w(bg_wre, bg_wim);
      if (!(std::abs(w) < 1.0)) throw std::invalid_argument("extremal parameter must lie in the disk");

      // seeded polynomial, normalized through the quadrature norm
      Rng rng(derive_seed(seed, 33));
      std::vector<Complex> coeffs(static_cast<std::size_t>(bg_degree) + 1);
      for (auto& c : coeffs) c = rng.complex_normal();
      DiskFunction f = DiskFunction::polynomial(coeffs);
      f = f.scaled(1.0 / bergman_norm(f, cfg));

      const ContractiveReport poly_rep = contractive_check(f, cfg, phi);
      const DiskSupReport sup_rep = pointwise_disk_bound(f, cfg);
      const DiskFunction ex = DiskFunction::extremal(w, bg_theta);
      const ContractiveReport ex_rep = contractive_check(ex, cfg, phi);
      const double ex_norm = bergman_norm(ex, cfg);

      double residual = 0.0;
      Rng rng2(derive_seed(seed, 34));
      for (int i = 0; i < 1000; ++i) {
        const Complex wz(0.95 * (2 * rng2.uniform01() - 1), 0.95 * (2 * rng2.uniform01() - 1));
        const Complex zz(0.95 * (2 * rng2.uniform01() - 1), 0.95 * (2 * rng2.uniform01() - 1));
        if (std::abs(wz) >= 1.0 || std::abs(zz) >= 1.0) continue;
        residual = std::max(residual, mobius_identity_residual(wz, zz));
      }

      const bool pass = poly_rep.pass && sup_rep.pass && std::abs(ex_norm - 1.0) < 1e-8 &&
                        std::abs(ex_rep.lhs - ex_rep.rhs) < 1e-6 && residual < 1e-13;
      json j{{"p", bg_p},
             {"alpha", bg_alpha},
             {"phi", phi.name()},
             {"lhs", poly_rep.lhs},
             {"rhs", poly_rep.rhs},
             {"sup_pointwise", sup_rep.sup},
             {"extremal_norm", ex_norm},
             {"extremal_gap", std::abs(ex_rep.lhs - ex_rep.rhs)},
             {"mobius_residual", residual},
             {"pass", pass}};
      atomic_write(bg_o.out, j.dump(2) + "\n");
      return pass ? kOk : kMathFail;
    }
  } catch (const std::invalid_argument& e) {
    log_json("usage_error", e.what());
    return kUsage;
  } catch (const std::domain_error& e) {
    log_json("assertion_failed", e.what());
    return kMathFail;
  } catch (const MathFailure& e) {
    log_json("assertion_failed", e.what());
    return kMathFail;
  } catch (const fs::filesystem_error& e) {
    log_json("io_error", e.what());
    return kIoFail;
  } catch (const std::ios_base::failure& e) {
    log_json("io_error", e.what());
    return kIoFail;
  }
  return kUsage;
}
