#include "compsum_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "compsum/adversarial.hpp"
#include "compsum/bounds.hpp"
#include "compsum/csv.hpp"
#include "compsum/dataset.hpp"
#include "compsum/loss.hpp"
#include "compsum/model.hpp"
#include "compsum/risk.hpp"
#include "compsum/sampling.hpp"
#include "compsum/train.hpp"
#include "compsum/transform.hpp"

namespace compsum::cli {

namespace fs = std::filesystem;
using csv::format_real;

namespace {

const std::vector<KeyInfo> kSeedKey{{"seed", "0", "random seed (overridden by --seed)"}};

const std::vector<KeyInfo> kTaskKeys{
    {"task", "mixture", "synthetic task: mixture or margin"},
    {"mixture.labels", "10", "number of classes"},
    {"mixture.dim", "20", "input dimension"},
    {"mixture.mean_scale", "0.7", "class means are mean_scale * N(0, I)"},
    {"mixture.noise", "1", "within-class standard deviation"},
    {"margin.dim", "20", "input dimension"},
    {"margin.gap", "1", "gap between the classes along feature 0"},
    {"margin.robust_jitter", "1", "spread of feature 0 beyond the gap"},
    {"margin.weak_shift", "0.5", "class shift of the weak features"},
    {"margin.weak_noise", "1", "noise of the weak features"},
    {"data.train", "5000", "training points"},
    {"data.validation", "1000", "held-out points for checkpoint selection"},
    {"data.test", "1000", "test points"},
};

const std::vector<KeyInfo> kEvalKeys{
    {"eval.p", "inf", "attack norm: 1, 2 or inf"},
    {"eval.gamma", "", "attack radius; unset disables robust accuracy unless adv.enabled"},
    {"eval.pgd_steps", "40", "PGD steps on the margin"},
    {"eval.restarts", "1", "random restarts"},
};

std::vector<KeyInfo> concat(std::initializer_list<std::vector<KeyInfo>> parts) {
  std::vector<KeyInfo> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::string tau_tag(double tau) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", tau);
  return buf;
}

std::vector<Tau> tau_list(const Config& cfg, const std::vector<double>& fallback) {
  std::vector<Tau> out;
  for (double t : cfg.get_double_list("tau", fallback)) out.emplace_back(t);
  return out;
}

std::size_t positive_size(const Config& cfg, const std::string& key, long long fallback) {
  const long long v = cfg.get_int(key, fallback);
  if (v < 1) throw ConfigError("key '" + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

std::size_t label_count(const Config& cfg, const std::string& key, long long fallback) {
  const std::size_t n = positive_size(cfg, key, fallback);
  if (n < 2) throw ConfigError("key '" + key + "' must be >= 2");
  return n;
}

std::string out_path(const GlobalOptions& opts, const std::string& fallback) {
  return opts.out.empty() ? fallback : opts.out;
}

void csv_header(std::ostream& out, const std::vector<std::string>& cols) { csv::write_row(out, cols); }

DatasetSplit load_task(const Config& cfg, std::uint64_t seed) {
  const std::string task = cfg.get_string("task", "mixture");
  const std::size_t n_train = positive_size(cfg, "data.train", 5000);
  const long long n_val = cfg.get_int("data.validation", 1000);
  const long long n_test = cfg.get_int("data.test", 1000);
  if (n_val < 0 || n_test < 0) throw ConfigError("data sizes must be >= 0");
  if (task == "mixture") {
    MixtureSpec ms;
    ms.num_labels = label_count(cfg, "mixture.labels", 10);
    ms.dim = positive_size(cfg, "mixture.dim", 20);
    ms.mean_scale = cfg.get_double("mixture.mean_scale", 0.7);
    ms.noise = cfg.get_double("mixture.noise", 1.0);
    return make_mixture_task(ms, n_train, static_cast<std::size_t>(n_val),
                             static_cast<std::size_t>(n_test), seed);
  }
  if (task == "margin") {
    MarginSpec ms;
    ms.dim = positive_size(cfg, "margin.dim", 20);
    ms.gap = cfg.get_double("margin.gap", 1.0);
    ms.robust_jitter = cfg.get_double("margin.robust_jitter", 1.0);
    ms.weak_shift = cfg.get_double("margin.weak_shift", 0.5);
    ms.weak_noise = cfg.get_double("margin.weak_noise", 1.0);
    return make_margin_task(ms, n_train, static_cast<std::size_t>(n_val),
                            static_cast<std::size_t>(n_test), seed);
  }
  throw ConfigError("key 'task': expected mixture or margin, got '" + task + "'");
}

// Designed radius of the margin task, a small default otherwise.
double default_gamma(const Config& cfg) {
  if (cfg.get_string("task", "mixture") == "margin") return cfg.get_double("margin.gap", 1.0) / 2.0;
  return 0.1;
}

std::optional<PerturbationBall> eval_ball(const Config& cfg, bool adversarial) {
  if (!cfg.has("eval.gamma") && !adversarial) return std::nullopt;
  const double gamma = cfg.has("eval.gamma") ? cfg.get_double("eval.gamma", 0.0)
                                             : cfg.get_double("adv.gamma", default_gamma(cfg));
  return PerturbationBall::make(cfg.get_double("eval.p", INFINITY), gamma);
}

AdvParams eval_attack(const Config& cfg) {
  AdvParams a = TrainConfig::eval_attack_defaults();
  a.pgd_steps = static_cast<int>(cfg.get_int("eval.pgd_steps", 40));
  a.restarts = static_cast<int>(cfg.get_int("eval.restarts", 1));
  a.seed ^= cfg.get_uint("seed", 0);
  if (a.pgd_steps < 0 || a.restarts < 0) throw ConfigError("eval.pgd_steps and eval.restarts must be >= 0");
  return a;
}

// ---------------------------------------------------------------- verify

struct SuiteOutcome {
  std::size_t rows = 0;
  std::size_t violations = 0;
  std::size_t flagged = 0;
  double worst = std::numeric_limits<double>::infinity();
};

void summarize(std::ostream& log, const std::string& suite, const SuiteOutcome& s,
               const std::string& worst_label) {
  log << suite << ": " << s.rows << " rows, " << s.violations << " violations, " << s.flagged
      << " flagged, " << worst_label << " " << format_real(s.worst) << "\n";
}

SuiteOutcome verify_bounds(const Config& cfg, std::ostream& out) {
  const auto taus = tau_list(cfg, {0, 0.5, 1, 1.5, 2, 3});
  const auto ns = cfg.get_int_list("n", {2, 3, 4, 5});
  const std::size_t instances = positive_size(cfg, "instances", 1000);
  const std::size_t support = positive_size(cfg, "support", 3);
  const double sd = cfg.get_double("score_sd", 2.0);
  const double alpha = cfg.get_double("alpha", 0.5);
  const std::string hyp = cfg.get_string("hypothesis", "complete");
  const double lambda = cfg.get_double("lambda", 30.0);
  const double tol = cfg.get_double("tolerance", 1e-9);
  if (hyp != "complete" && hyp != "box" && hyp != "asymmetric") {
    throw ConfigError("key 'hypothesis': expected complete, box or asymmetric, got '" + hyp + "'");
  }
  for (long long n : ns) {
    if (n < 2) throw ConfigError("key 'n': label counts must be >= 2");
  }

  std::mt19937_64 rng(cfg.get_uint("seed", 0));
  write_bound_csv_header(out);
  SuiteOutcome s;
  for (const Tau& tau : taus) {
    for (std::size_t i = 0; i < instances; ++i) {
      const auto n = static_cast<std::size_t>(ns[i % ns.size()]);
      const std::size_t k = 1 + i % support;
      HypothesisSpec spec = HypothesisSpec::complete(n);
      if (hyp == "box") spec = HypothesisSpec::score_box(n, lambda);
      if (hyp == "asymmetric") {
        std::vector<double> b(n);
        for (std::size_t y = 0; y < n; ++y) b[y] = lambda * static_cast<double>(y + 1) / static_cast<double>(n);
        spec = HypothesisSpec::label_box(b);
      }
      const FiniteDistribution dist = random_distribution(k, n, alpha, rng);
      ScoreAssignment h;
      for (std::size_t q = 0; q < k; ++q) {
        std::vector<double> sc = random_scores(n, sd, rng);
        if (!spec.is_complete()) {
          for (std::size_t y = 0; y < n; ++y) sc[y] = std::clamp(sc[y], spec.lower(y), spec.upper(y));
        }
        h.scores.push_back(std::move(sc));
      }
      const BoundReport r = verify_h_consistency_bound(dist, h, spec, tau);
      write_bound_csv_row(out, r);
      ++s.rows;
      if (r.violated(tol)) ++s.violations;
      if (r.flags & ~kFlagViolation) ++s.flagged;
      if (!(r.flags & kFlagPreconditionUnmet)) s.worst = std::min(s.worst, r.slack);
    }
  }
  return s;
}

SuiteOutcome verify_tightness(const Config& cfg, std::ostream& out) {
  const auto taus = tau_list(cfg, {0, 0.25, 0.5, 0.75, 1});
  const std::size_t n = label_count(cfg, "n", 10);
  const std::size_t points = positive_size(cfg, "beta.points", 21);
  const double tol = cfg.get_double("tolerance", 1e-9);
  csv_header(out, {"tau", "n", "beta", "zero_one_side", "surrogate_side", "transform_value",
                   "err_zero_one", "err_surrogate", "flags"});
  SuiteOutcome s;
  s.worst = 0.0;
  for (const Tau& tau : taus) {
    for (std::size_t i = 0; i < points; ++i) {
      const double beta = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
      const TightnessInstance inst = build_tightness_instance(beta, tau, n);
      TightnessResult r = evaluate_tightness(inst);
      const double e01 = std::abs(r.zero_one_side - beta);
      const double es = std::abs(r.surrogate_side - r.transform_value);
      const bool in_range = !(r.flags & kFlagOutsideTightRange);
      if (in_range && (e01 > tol || es > tol)) {
        r.flags |= kFlagViolation;
        ++s.violations;
      }
      if (!in_range) ++s.flagged;
      if (in_range) s.worst = std::max({s.worst, e01, es});
      csv::write_row(out, {format_real(tau.value()), std::to_string(n), format_real(beta),
                           format_real(r.zero_one_side), format_real(r.surrogate_side),
                           format_real(r.transform_value), format_real(e01), format_real(es),
                           flags_to_string(r.flags)});
      ++s.rows;
    }
  }
  return s;
}

SuiteOutcome verify_gaps(const Config& cfg, std::ostream& out) {
  std::vector<double> taus = cfg.get_double_list("tau", {0, 1, 1.5, 2});
  if (!std::is_sorted(taus.begin(), taus.end())) throw ConfigError("key 'tau' must be ascending");
  const std::size_t configs = positive_size(cfg, "configs", 100);
  const double lmin = cfg.get_double("lambda.min", 0.1);
  const double lmax = cfg.get_double("lambda.max", 5.0);
  const long long nmin = cfg.get_int("n.min", 2);
  const long long nmax = cfg.get_int("n.max", 20);
  const double tol = cfg.get_double("tolerance", 1e-10);
  if (!(lmin > 0.0 && lmin <= lmax)) throw ConfigError("need 0 < lambda.min <= lambda.max");
  if (nmin < 2 || nmax < nmin) throw ConfigError("need 2 <= n.min <= n.max");

  std::mt19937_64 rng(cfg.get_uint("seed", 0));
  std::uniform_real_distribution<double> ul(lmin, lmax);
  std::uniform_int_distribution<long long> un(nmin, nmax);
  std::uniform_real_distribution<double> ur(0.0, 3.0);
  csv_header(out, {"config", "lambda", "n", "r_star0", "tau", "gap_bound", "increase", "pass"});
  SuiteOutcome s;
  s.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < configs; ++c) {
    const double lambda = ul(rng);
    const auto n = static_cast<std::size_t>(un(rng));
    const HypothesisSpec spec = HypothesisSpec::score_box(n, lambda);
    const double r0 = static_cast<double>(n - 1) * std::exp(-2.0 * lambda) * std::exp(ur(rng));
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (double t : taus) {
      const double g = gap_upper_bound_deterministic(spec, Tau(t), r0);
      const double inc = std::isnan(prev) ? 0.0 : g - prev;
      const bool pass = inc <= tol;
      if (!pass) ++s.violations;
      s.worst = std::max(s.worst, inc);
      csv::write_row(out, {std::to_string(c), format_real(lambda), std::to_string(n), format_real(r0),
                           format_real(t), format_real(g), format_real(inc), pass ? "1" : "0"});
      ++s.rows;
      prev = g;
    }
  }
  return s;
}

// Scores whose argmax differs from the mode of p.
std::vector<double> misclassifying_scores(const CondDist& p, double sd, std::mt19937_64& rng) {
  const std::size_t n = p.size();
  for (;;) {
    std::vector<double> sc = random_scores(n, sd, rng);
    if (predicted_label(sc) != p.mode()) return sc;
  }
}

SuiteOutcome verify_lemmas(const Config& cfg, std::ostream& out) {
  const auto taus = tau_list(cfg, {0, 0.5, 1, 1.5, 2, 2.5, 3});
  const std::size_t instances = positive_size(cfg, "instances", 20);
  const std::size_t nmax = label_count(cfg, "n.max", 5);
  const double tol = cfg.get_double("tolerance", 1e-6);
  const double conservation_tol = cfg.get_double("conservation_tolerance", 1e-12);
  std::mt19937_64 rng(cfg.get_uint("seed", 0));
  csv_header(out, {"check", "tau", "n", "closed", "numeric", "abs_diff", "pass"});
  SuiteOutcome s;
  s.worst = 0.0;
  auto row = [&](const std::string& check, double tau, std::size_t n, double a, double b, bool pass) {
    csv::write_row(out, {check, format_real(tau), std::to_string(n), format_real(a), format_real(b),
                         format_real(std::abs(a - b)), pass ? "1" : "0"});
    ++s.rows;
    if (!pass) ++s.violations;
  };
  for (const Tau& tau : taus) {
    for (std::size_t i = 0; i < instances; ++i) {
      const std::size_t n = 2 + i % (nmax - 1);
      const CondDist p = random_cond_dist(n, 1.0, rng);
      const std::vector<double> sc = misclassifying_scores(p, 1.5, rng);

      const double sup_c = lemma_sup_closed(sc, p, tau);
      const double sup_n = lemma_sup_numeric(sc, p, tau);
      s.worst = std::max(s.worst, std::abs(sup_c - sup_n));
      row("lemma_sup", tau.value(), n, sup_c, sup_n, std::abs(sup_c - sup_n) <= tol);

      const LemmaInfCheck inf = verify_lemma_inf(p, tau, predicted_label(sc), tol);
      row(inf.equality_expected ? "lemma_inf" : "lemma_inf_lower", tau.value(), n, inf.closed,
          inf.brute, inf.pass);

      // exp-sum conservation along the family
      const HBarMuFamily fam(sc, p.mode());
      double base_sum = 0.0;
      for (double v : sc) base_sum += std::exp(v);
      double worst_rel = 0.0;
      for (int j = 1; j < 16; ++j) {
        const double mu = fam.mu_lower() + (fam.mu_upper() - fam.mu_lower()) * j / 16.0;
        double sum = 0.0;
        for (double v : fam.at(mu)) sum += std::exp(v);
        worst_rel = std::max(worst_rel, std::abs(sum - base_sum) / base_sum);
      }
      row("exp_sum_conservation", tau.value(), n, base_sum, base_sum * (1.0 + worst_rel),
          worst_rel <= conservation_tol);
    }
    // psi(alpha, beta) >= T(beta) on an (alpha, beta) grid
    for (std::size_t n : {std::size_t{2}, std::size_t{5}, std::size_t{10}}) {
      const TransformParams tp(tau, n);
      double worst_margin = std::numeric_limits<double>::infinity();
      double at_psi = 0.0;
      double at_t = 0.0;
      for (int a = 1; a <= 20; ++a) {
        const double alpha = a / 20.0;
        for (int b = 0; b <= 20; ++b) {
          const double beta = alpha * b / 20.0;
          const double psi = psi_tau(alpha, beta, tp);
          const double t = t_tau(beta, tp);
          if (psi - t < worst_margin) {
            worst_margin = psi - t;
            at_psi = psi;
            at_t = t;
          }
        }
      }
      row("psi_dominates_t", tau.value(), n, at_psi, at_t, worst_margin >= -1e-12);
    }
  }
  return s;
}

SuiteOutcome verify_adversarial(const Config& cfg, std::ostream& out) {
  const auto taus = tau_list(cfg, {0, 0.5, 1, 1.5, 2});
  const std::size_t instances = positive_size(cfg, "instances", 1000);
  const std::size_t support = positive_size(cfg, "support", 3);
  const double bound = cfg.get_double("bound", 2.0);
  const double gamma_max = cfg.get_double("gamma.max", 0.5);
  const double p = cfg.get_double("p", INFINITY);
  const int grid = static_cast<int>(cfg.get_int("grid", 201));
  const double tol = cfg.get_double("tolerance", 1e-6);
  AdvParams adv = AdvParams::defaults(2);
  adv.rho = cfg.get_double("rho", 1.0);
  adv.nu = cfg.get_double("nu", std::max(1.0, AdvParams::min_nu(2, adv.rho)));
  adv.allow_small_nu = cfg.get_bool("allow_small_nu", false);
  if (!(bound > 0.0) || !(gamma_max >= 0.0)) throw ConfigError("need bound > 0 and gamma.max >= 0");

  std::mt19937_64 rng(cfg.get_uint("seed", 0));
  std::uniform_real_distribution<double> ug(0.0, gamma_max);
  std::uniform_real_distribution<double> uw(-bound, bound);
  const HypothesisSpec spec = HypothesisSpec::linear(2, 1, bound, true);
  csv_header(out, {"instance", "tau", "gamma", "lhs", "rhs", "slack", "rhs_smooth",
                   "rhs_reciprocal", "slack_reciprocal", "gap01", "gap_surrogate", "flags"});
  SuiteOutcome s;
  for (std::size_t i = 0; i < instances; ++i) {
    const Tau tau = taus[i % taus.size()];
    const std::size_t k = 1 + i % support;
    const FiniteDistribution dist = random_distribution(k, 2, 0.5, rng, 1, 2.0);
    const PerturbationBall ball = PerturbationBall::make(p, ug(rng));
    DifferentiableModel h = DifferentiableModel::linear(1, 2);
    std::vector<double> params(4);
    for (double& v : params) v = uw(rng);
    h.set_parameters(params);
    AdvBoundReport r = verify_adv_bound(dist, spec, h, tau, adv, ball, grid);
    bool bad = r.bound.slack < -tol;
    if (r.rhs_smooth < r.bound.rhs - tol) {
      bad = true;
      r.bound.flags |= kFlagViolation;
    }
    if (bad) ++s.violations;
    if (r.bound.flags & ~kFlagViolation) ++s.flagged;
    s.worst = std::min(s.worst, r.bound.slack);
    csv::write_row(out, {std::to_string(i), format_real(tau.value()), format_real(ball.gamma),
                         format_real(r.bound.lhs), format_real(r.bound.rhs),
                         format_real(r.bound.slack), format_real(r.rhs_smooth),
                         format_real(r.rhs_reciprocal), format_real(r.slack_reciprocal),
                         format_real(r.bound.gap01), format_real(r.bound.gap_surrogate),
                         flags_to_string(r.bound.flags)});
    ++s.rows;
  }
  return s;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"transform-table", "verify", "gaps", "train",
                                              "evaluate"};
  return names;
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> suites{"bounds", "tightness", "gaps", "lemmas",
                                               "adversarial"};
  return suites;
}

std::vector<KeyInfo> command_keys(const std::string& command, const std::string& suite) {
  if (command == "transform-table") {
    return concat({{{"tau", "0,0.5,1,1.5,2", "comma-separated tau values"},
                    {"n", "10", "number of labels"},
                    {"points", "101", "grid points for beta in [0, 1] and t in [0, T(1)]"}}});
  }
  if (command == "verify") {
    if (suite == "bounds") {
      return concat({{{"tau", "0,0.5,1,1.5,2,3", "tau values"},
                      {"n", "2,3,4,5", "label counts, cycled over instances"},
                      {"instances", "1000", "instances per tau"},
                      {"support", "3", "support sizes cycle through 1..support"},
                      {"score_sd", "2", "standard deviation of random scores"},
                      {"alpha", "0.5", "Dirichlet concentration of conditionals"},
                      {"hypothesis", "complete", "complete, box or asymmetric"},
                      {"lambda", "30", "score bound for box and asymmetric"},
                      {"tolerance", "1e-9", "allowed negative slack"}},
                     kSeedKey});
    }
    if (suite == "tightness") {
      return concat({{{"tau", "0,0.25,0.5,0.75,1", "tau values"},
                      {"n", "10", "number of labels"},
                      {"beta.points", "21", "beta grid on [0, 1]"},
                      {"tolerance", "1e-9", "allowed absolute error"}},
                     kSeedKey});
    }
    if (suite == "gaps") {
      return concat({{{"tau", "0,1,1.5,2", "ascending tau values"},
                      {"configs", "100", "random (lambda, n, r_star0) configurations"},
                      {"lambda.min", "0.1", "smallest score bound"},
                      {"lambda.max", "5", "largest score bound"},
                      {"n.min", "2", "smallest label count"},
                      {"n.max", "20", "largest label count"},
                      {"tolerance", "1e-10", "allowed increase between consecutive tau"}},
                     kSeedKey});
    }
    if (suite == "lemmas") {
      return concat({{{"tau", "0,0.5,1,1.5,2,2.5,3", "tau values"},
                      {"instances", "20", "random conditionals per tau"},
                      {"n.max", "5", "largest label count"},
                      {"tolerance", "1e-6", "closed form vs numeric"},
                      {"conservation_tolerance", "1e-12", "relative exp-sum drift"}},
                     kSeedKey});
    }
    if (suite == "adversarial") {
      return concat({{{"tau", "0,0.5,1,1.5,2", "tau values, cycled"},
                      {"instances", "1000", "random instances"},
                      {"support", "3", "support sizes cycle through 1..support"},
                      {"bound", "2", "weight bound of the linear class"},
                      {"gamma.max", "0.5", "radii drawn uniformly from [0, gamma.max]"},
                      {"p", "inf", "ball norm"},
                      {"rho", "1", "margin"},
                      {"nu", "max(1, 1/rho)", "deviation weight"},
                      {"allow_small_nu", "false", "accept nu below 1/rho"},
                      {"grid", "201", "grid points per axis for the class infima"},
                      {"tolerance", "1e-6", "allowed negative slack"}},
                     kSeedKey});
    }
    return {};
  }
  if (command == "gaps") {
    return concat({{{"tau", "0,0.5,1,1.5,2", "tau values"},
                    {"distribution", "", "distribution CSV; unset draws a random one"},
                    {"n", "3", "labels of the random distribution"},
                    {"support", "4", "support size of the random distribution"},
                    {"alpha", "0.5", "Dirichlet concentration of random conditionals"},
                    {"hypothesis", "box", "box or complete"},
                    {"lambda", "2", "score bound of the box"}},
                   kSeedKey});
  }
  if (command == "train") {
    return concat({{{"tau", "1", "tau values; more than one writes one file pair per tau"},
                    {"model", "mlp", "mlp or linear"},
                    {"model.hidden", "64", "hidden width of the mlp"},
                    {"lr0", "0.1", "initial learning rate"},
                    {"momentum", "0.9", "Nesterov momentum"},
                    {"weight_decay", "5e-4", "L2 weight decay"},
                    {"epochs", "20", "epochs"},
                    {"batch_size", "64", "mini-batch size"},
                    {"schedule", "cosine", "cosine or constant"},
                    {"ema_decay", "0", "parameter averaging decay; 0 disables"},
                    {"adv.enabled", "false", "train on the smooth adversarial comp-sum loss"},
                    {"adv.rho", "1", "margin"},
                    {"adv.nu", "max(1, sqrt(n-1)/rho)", "deviation weight"},
                    {"adv.allow_small_nu", "false", "accept nu below sqrt(n-1)/rho"},
                    {"adv.p", "inf", "ball norm: 1, 2 or inf"},
                    {"adv.gamma", "margin.gap/2 or 0.1", "ball radius"},
                    {"adv.pgd_steps", "10", "PGD steps of the deviation attack"},
                    {"adv.step_size", "0", "PGD step; 0 selects 2.5 gamma / steps"},
                    {"adv.restarts", "1", "random restarts"}},
                   kTaskKeys, kEvalKeys, kSeedKey});
  }
  if (command == "evaluate") {
    return concat({{{"checkpoint", "", "model file written by train (required)"},
                    {"split", "test", "train, validation or test"}},
                   kTaskKeys, kEvalKeys, kSeedKey});
  }
  return {};
}

AtomicOutputs::~AtomicOutputs() {
  if (committed_) return;
  for (auto& it : items_) {
    if (it.stream) it.stream->close();
    std::error_code ec;
    fs::remove(it.temp, ec);
  }
}

std::ostream& AtomicOutputs::open(const std::string& path) {
  Item it;
  it.path = path;
  it.temp = path + ".partial";
  // Binary mode keeps CSV line endings byte-exact.
  it.stream = std::make_unique<std::ofstream>(it.temp, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!*it.stream) throw std::runtime_error("cannot open output '" + path + "' for writing");
  items_.push_back(std::move(it));
  return *items_.back().stream;
}

void AtomicOutputs::commit() {
  for (auto& it : items_) {
    it.stream->flush();
    if (!*it.stream) throw std::runtime_error("write failed for '" + it.path + "'");
    it.stream->close();
  }
  for (auto& it : items_) {
    std::error_code ec;
    fs::rename(it.temp, it.path, ec);
    if (ec) throw std::runtime_error("cannot move output into '" + it.path + "': " + ec.message());
  }
  committed_ = true;
}

int cmd_transform_table(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  const auto taus = tau_list(cfg, {0, 0.5, 1, 1.5, 2});
  const std::size_t n = label_count(cfg, "n", 10);
  const std::size_t points = positive_size(cfg, "points", 101);
  if (points < 2) throw ConfigError("key 'points' must be >= 2");
  const std::string path = out_path(opts, "transform_table.csv");

  AtomicOutputs outs;
  std::ostream& out = outs.open(path);
  csv_header(out, {"tau", "n", "beta", "T", "T_tilde", "t", "Gamma", "Gamma_tilde"});
  for (const Tau& tau : taus) {
    const TransformParams tp(tau, n);
    const double t_max = t_tau(1.0, tp);
    for (std::size_t i = 0; i < points; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(points - 1);
      const double t = t_max * frac;
      csv::write_row(out, {format_real(tau.value()), std::to_string(n), format_real(frac),
                           format_real(t_tau(frac, tp)), format_real(t_tilde(frac, tp)),
                           format_real(t), format_real(gamma_tau(t, tp)),
                           format_real(gamma_tilde(t, tp))});
    }
  }
  outs.commit();
  log << "wrote " << path << " (" << taus.size() * points << " rows)\n";
  return kExitOk;
}

int cmd_verify(const std::string& suite, const Config& cfg, const GlobalOptions& opts,
               std::ostream& log) {
  const std::string path = out_path(opts, "verify_" + suite + ".csv");
  AtomicOutputs outs;
  std::ostream& out = outs.open(path);
  SuiteOutcome s;
  std::string worst_label = "min slack";
  if (suite == "bounds") {
    s = verify_bounds(cfg, out);
  } else if (suite == "tightness") {
    s = verify_tightness(cfg, out);
    worst_label = "max error";
  } else if (suite == "gaps") {
    s = verify_gaps(cfg, out);
    worst_label = "max increase";
  } else if (suite == "lemmas") {
    s = verify_lemmas(cfg, out);
    worst_label = "max lemma_sup diff";
  } else if (suite == "adversarial") {
    s = verify_adversarial(cfg, out);
  } else {
    throw ConfigError("unknown verify suite '" + suite + "'");
  }
  outs.commit();
  summarize(log, suite, s, worst_label);
  log << "wrote " << path << "\n";
  return s.violations == 0 ? kExitOk : kExitViolation;
}

int cmd_gaps(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  const auto taus = tau_list(cfg, {0, 0.5, 1, 1.5, 2});
  std::mt19937_64 rng(cfg.get_uint("seed", 0));
  std::optional<FiniteDistribution> dist;
  if (cfg.has("distribution")) {
    const std::string in_path = cfg.get_string("distribution", "");
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open distribution file '" + in_path + "'");
    try {
      dist = read_distribution_csv(in);
    } catch (const std::exception& e) {
      throw ConfigError(in_path + ": " + e.what());
    }
  } else {
    dist = random_distribution(positive_size(cfg, "support", 4), label_count(cfg, "n", 3),
                               cfg.get_double("alpha", 0.5), rng);
  }
  const std::size_t n = dist->num_labels();
  const std::string hyp = cfg.get_string("hypothesis", "box");
  const double lambda = cfg.get_double("lambda", 2.0);
  HypothesisSpec spec = HypothesisSpec::complete(n);
  if (hyp == "box") {
    spec = HypothesisSpec::score_box(n, lambda);
  } else if (hyp != "complete") {
    throw ConfigError("key 'hypothesis': expected box or complete, got '" + hyp + "'");
  }
  const std::string path = out_path(opts, "gaps.csv");
  AtomicOutputs outs;
  std::ostream& out = outs.open(path);
  csv_header(out, {"tau", "n", "lambda", "gap", "best_in_class", "expected_pointwise", "converged"});
  std::size_t unconverged = 0;
  for (const Tau& tau : taus) {
    const GapResult g = minimizability_gap(*dist, spec, tau);
    if (!g.converged) ++unconverged;
    csv::write_row(out, {format_real(tau.value()), std::to_string(n),
                         format_real(spec.is_complete() ? INFINITY : lambda), format_real(g.gap),
                         format_real(g.best_in_class), format_real(g.expected_pointwise),
                         g.converged ? "1" : "0"});
  }
  outs.commit();
  log << "wrote " << path << " (" << taus.size() << " rows, " << unconverged
      << " not converged)\n";
  return kExitOk;
}

namespace {

struct TrainSetup {
  TrainConfig base;
  std::string model_kind;
  std::size_t hidden;
};

TrainSetup train_setup(const Config& cfg, std::size_t num_labels, const GlobalOptions& opts) {
  TrainSetup s;
  TrainConfig& c = s.base;
  c.lr0 = cfg.get_double("lr0", 0.1);
  c.momentum = cfg.get_double("momentum", 0.9);
  c.weight_decay = cfg.get_double("weight_decay", 5e-4);
  c.epochs = static_cast<int>(cfg.get_int("epochs", 20));
  c.batch_size = positive_size(cfg, "batch_size", 64);
  const std::string sched = cfg.get_string("schedule", "cosine");
  if (sched == "cosine") {
    c.schedule = Schedule::Cosine;
  } else if (sched == "constant") {
    c.schedule = Schedule::Constant;
  } else {
    throw ConfigError("key 'schedule': expected cosine or constant, got '" + sched + "'");
  }
  c.ema_decay = cfg.get_double("ema_decay", 0.0);
  c.seed = cfg.get_uint("seed", 0);
  c.threads = opts.threads;
  const bool adversarial = cfg.get_bool("adv.enabled", false);
  if (adversarial) {
    AdversarialConfig a;
    a.params.rho = cfg.get_double("adv.rho", 1.0);
    a.params.nu = cfg.get_double("adv.nu", std::max(1.0, AdvParams::min_nu(num_labels, a.params.rho)));
    a.params.allow_small_nu = cfg.get_bool("adv.allow_small_nu", false);
    a.params.pgd_steps = static_cast<int>(cfg.get_int("adv.pgd_steps", 10));
    a.params.pgd_step_size = cfg.get_double("adv.step_size", 0.0);
    a.params.restarts = static_cast<int>(cfg.get_int("adv.restarts", 1));
    a.params.seed = c.seed ^ 0xad7ULL;
    a.params.validate(num_labels);
    a.ball = PerturbationBall::make(cfg.get_double("adv.p", INFINITY),
                                    cfg.get_double("adv.gamma", default_gamma(cfg)));
    c.adversarial = a;
  }
  c.eval_ball = eval_ball(cfg, adversarial);
  c.eval_attack = eval_attack(cfg);
  c.validate();
  s.model_kind = cfg.get_string("model", "mlp");
  if (s.model_kind != "mlp" && s.model_kind != "linear") {
    throw ConfigError("key 'model': expected mlp or linear, got '" + s.model_kind + "'");
  }
  s.hidden = positive_size(cfg, "model.hidden", 64);
  return s;
}

std::string metric_text(const std::optional<double>& v) { return v ? format_real(*v) : "-"; }

}  // namespace

int cmd_train(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  const auto taus = tau_list(cfg, {1.0});
  const std::uint64_t seed = cfg.get_uint("seed", 0);
  const DatasetSplit data = load_task(cfg, seed);
  const TrainSetup setup = train_setup(cfg, data.train.num_labels, opts);
  const std::string prefix = out_path(opts, "train");

  AtomicOutputs outs;
  for (const Tau& tau : taus) {
    TrainConfig c = setup.base;
    c.tau = tau;
    std::mt19937_64 rng(seed ^ 0x1417ULL);
    DifferentiableModel model = setup.model_kind == "mlp"
                                    ? DifferentiableModel::mlp(data.train.dim, setup.hidden,
                                                               data.train.num_labels)
                                    : DifferentiableModel::linear(data.train.dim, data.train.num_labels);
    model.init_random(rng);
    const TrainResult r = c.adversarial ? train_adv_comp_sum(data.train, data.validation, model, c)
                                        : train_standard(data.train, data.validation, model, c);
    const std::string stem = taus.size() > 1 ? prefix + "_tau" + tau_tag(tau.value()) : prefix;
    write_metrics_csv(outs.open(stem + ".csv"), r.history);
    write_checkpoint(outs.open(stem + ".ckpt"), r.model);
    const EvalMetrics test = evaluate(r.model, data.test, c.eval_ball, c.eval_attack, c.threads);
    log << "tau=" << format_real(tau.value()) << " best_epoch=" << r.best_epoch
        << " test_clean_acc=" << format_real(test.clean_acc)
        << " test_robust_acc=" << metric_text(test.robust_acc);
    if (r.diverged) log << " diverged: " << r.message;
    log << "\n";
  }
  outs.commit();
  log << "wrote " << taus.size() << " metrics/checkpoint pair(s) with prefix " << prefix << "\n";
  return kExitOk;
}

int cmd_evaluate(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  if (!cfg.has("checkpoint")) throw ConfigError("key 'checkpoint' is required");
  const std::string ckpt = cfg.get_string("checkpoint", "");
  std::ifstream in(ckpt, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + ckpt + "'");
  DifferentiableModel model = [&] {
    try {
      return read_checkpoint(in);
    } catch (const std::exception& e) {
      throw ConfigError(ckpt + ": " + e.what());
    }
  }();
  const DatasetSplit data = load_task(cfg, cfg.get_uint("seed", 0));
  const std::string split = cfg.get_string("split", "test");
  const SyntheticDataset* set = nullptr;
  if (split == "train") set = &data.train;
  if (split == "validation") set = &data.validation;
  if (split == "test") set = &data.test;
  if (!set) throw ConfigError("key 'split': expected train, validation or test, got '" + split + "'");
  if (set->dim != model.input_dim() || set->num_labels != model.num_labels()) {
    throw ConfigError("checkpoint shape does not match the configured task");
  }
  const auto ball = eval_ball(cfg, false);
  const EvalMetrics m = evaluate(model, *set, ball, eval_attack(cfg), opts.threads);

  const std::string path = out_path(opts, "evaluate.csv");
  AtomicOutputs outs;
  std::ostream& out = outs.open(path);
  csv_header(out, {"split", "count", "clean_acc", "robust_acc"});
  csv::write_row(out, {split, std::to_string(m.count), format_real(m.clean_acc),
                       m.robust_acc ? format_real(*m.robust_acc) : std::string()});
  outs.commit();
  log << split << ": clean_acc=" << format_real(m.clean_acc)
      << " robust_acc=" << metric_text(m.robust_acc) << "\nwrote " << path << "\n";
  return kExitOk;
}

}  // namespace compsum::cli
