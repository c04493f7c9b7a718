// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and runtime budgets are fixed constants below.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "incstab/certify.hpp"
#include "incstab/cli.hpp"
#include "incstab/config.hpp"
#include "incstab/iqc.hpp"
#include "incstab/loop.hpp"
#include "incstab/probes.hpp"
#include "incstab/region.hpp"
#include "incstab/srg.hpp"
#include "oracles.hpp"

namespace {

using namespace incstab;
namespace fs = std::filesystem;

const fs::path kSource = INCSTAB_SOURCE_DIR;

/// Collects failed checks for one criterion.
class Checks {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void Note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failures_.empty(); }
  std::string Summary() const {
    std::string s;
    for (const auto& n : notes_) s += (s.empty() ? "" : "; ") + n;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + ("FAILED " + f);
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

OperatorSpec Gain(Scalar k) { return MakeStatic(NonlinearityKind::kGain, k); }

Signal Constant(Scalar v, Index n, Scalar dt) { return Signal(Matrix::Constant(n, 1, v), dt); }

StateSpace SysOf(const OperatorSpec& op) { return std::get<LtiNode>(op.node().value).sys; }

Signal RandomSignal(std::mt19937_64& rng, Index n, Index dim, Scalar dt) {
  std::normal_distribution<Scalar> g(0, 1);
  Matrix m(n, dim);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return Signal(std::move(m), dt);
}

void Criterion1(Checks& c) {
  const std::vector<Scalar> amps = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const auto rows = ArctanExperiment(amps);
  double worst = 0;
  for (const auto& r : rows) {
    worst = std::max(worst, std::abs(r.ratio / oracle::ArctanRatioTaylor(r.amplitude) - 1));
  }
  c.Expect(worst <= 0.02, "ratio vs 3^(1/3) a^(-2/3) within 2%");
  const Scalar slope = LogLogSlope(rows);
  c.Expect(std::abs(slope + 2.0 / 3.0) <= 0.05, "log-log slope -2/3 +- 0.05");

  ProbeOptions o;
  o.sinusoids = 40;
  o.noise = 30;
  const auto pairs = ProbePairs(o);
  const Scalar radius = MaxRadius(SampleSrg(NegArctan(), pairs));
  c.Expect(pairs.size() >= 200, ">= 200 probe pairs");
  c.Expect(radius < 1, "SRG max radius < 1");
  c.Note("max ratio error " + Num(worst) + ", slope " + Num(slope) + ", " +
         std::to_string(pairs.size()) + " pairs, SRG radius " + Num(radius));
}

void Criterion2(Checks& c) {
  const auto pairs = ProbePairs(ProbeOptions{});
  for (auto [g1, g2] : std::vector<std::pair<Scalar, Scalar>>{{0.5, 1}, {0.9, 1}, {0.5, 1.9}}) {
    const Verdict v = CheckSmallGain(g1, g2);
    const GainEstimate e = ClosedLoopGainEstimate(Gain(g1), Gain(g2), 1, pairs);
    const std::string tag = "(" + Num(g1) + ", " + Num(g2) + ")";
    c.Expect(IsCertified(v), tag + " certified");
    c.Expect(std::abs(e.gamma - oracle::StaticLoopGain(g1, g2, 1)) <= 1e-6, tag + " gain exact to 1e-6");
    if (IsCertified(v)) {
      const Scalar bound = std::get<Certificate>(v).gamma;
      c.Expect(std::abs(bound - g1 / (1 - g1 * g2)) <= 1e-12, tag + " bound formula");
      c.Expect(e.gamma <= bound, tag + " empirical <= certified");
    }
    c.Note(tag + ": " + Num(e.gamma));
  }
}

void Criterion3(Checks& c) {
  ProbeOptions o;
  o.sinusoids = 2;
  o.noise = 1;
  const auto inputs = ProbeSignals(o);
  const std::vector<std::pair<Scalar, Scalar>> splits = {{0.1, 0.1}, {0.2, 0.2}, {0.1, 0.3}};
  for (const std::string name : {"small_gain.json", "srg_certification.json", "iqc_certification.json"}) {
    const JobConfig cfg = LoadConfig(kSource / "configs" / name);
    const OperatorSpec& h1 = cfg.systems.at("h1");
    const OperatorSpec& h2 = cfg.systems.at("h2");
    Scalar worst = 0;
    for (auto [tau, nu] : splits) {
      const IdentityCheck r = VerifyFeedbackIdentity(h1, h2, tau, nu, inputs);
      c.Expect(r.max_discrepancy <= 10 * r.tolerance, name + " tau=" + Num(tau) + " nu=" + Num(nu));
      worst = std::max(worst, r.max_discrepancy / r.tolerance);
    }
    c.Note(name + " worst/tol " + Num(worst));
  }
  const Scalar k1 = 0.5, k2 = 1.2;
  const Signal u = Constant(0.7, 100, 0.05);
  for (auto [tau, nu] : splits) {
    const IdentityCheck r = VerifyFeedbackIdentity(Gain(k1), Gain(k2), tau, nu, {u});
    const Scalar y = SolveFeedback(u, Gain(k1), Gain(k2), tau + nu).y.samples()(10, 0);
    c.Expect(r.max_discrepancy <= 10 * r.tolerance, "static tau=" + Num(tau));
    c.Expect(std::abs(y - 0.7 * k1 / (1 + k1 * (tau + nu) * k2)) <= 1e-7, "static closed form");
  }
}

Complex Member(const Primitive& p, std::mt19937_64& rng) {
  if (const auto* d = std::get_if<Disc>(&p)) return oracle::UniformInDisc(d->center, d->radius, rng);
  if (const auto* h = std::get_if<HalfPlane>(&p)) return oracle::InHalfPlane(h->normal, h->offset, 5, 5, rng);
  const auto& e = std::get<DiscExterior>(p);
  return oracle::InDiscExterior(e.center, e.radius, 5, rng);
}

Complex MemberOf(const Region& r, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, r.size() - 1);
  return Member(r.primitives()[pick(rng)], rng);
}

void Criterion4(Checks& c) {
  constexpr int kPoints = 10000;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<Scalar> unit(0, 1);
  const Region base{Disc{{3, 0}, 1},        Disc{{0.5, 0.8}, 0.3}, Disc{{0.5, -0.8}, 0.3},
                    HalfPlane{{1, 0}, 0.5}, DiscExterior{{0, 0}, 2}};
  auto sound = [&](const std::string& what, const Region& out, const std::function<Complex()>& draw) {
    int misses = 0;
    for (int i = 0; i < kPoints; ++i) {
      const Complex z = draw();
      if (!out.Contains(z, 1e-9 * (1 + std::abs(z)))) ++misses;
    }
    c.Expect(misses == 0, what + " (" + std::to_string(misses) + " misses)");
  };
  const Region inv = InvertRegion(base);
  sound("invert", inv, [&] {
    Complex z;
    do z = MemberOf(base, rng);
    while (std::abs(z) < 1e-6);
    return 1.0 / z;
  });
  const Scalar scale = -1.7;
  const Region scaled = ScaleRegion(base, scale);
  sound("scale", scaled, [&] { return scale * MemberOf(base, rng); });
  const Region bounded{Disc{{3, 0}, 1}, Disc{{0.5, 0.8}, 0.3}, Disc{{0.5, -0.8}, 0.3}};
  const Region chord = ChordClosure(bounded);
  sound("chord", chord, [&] {
    const Complex z = MemberOf(bounded, rng);
    const Scalar l = unit(rng);
    return l * z + (1 - l) * std::conj(z);
  });
  const Region other{Disc{{-1, 0.2}, 0.4}, Disc{{-1, -0.2}, 0.4}};
  const Region a{Disc{{3, 0}, 1}, HalfPlane{{1, 0}, 0.5}};
  const Region sum = MinkowskiSum(a, other);
  sound("minkowski", sum, [&] { return MemberOf(a, rng) + MemberOf(other, rng); });

  const Disc g = std::get<Disc>(InvertRegion(Region{Disc{{3, 0}, 1}}).primitives()[0]);
  c.Expect(std::abs(g.center - Complex(0.375, 0)) <= 1e-12 && std::abs(g.radius - 0.125) <= 1e-12,
           "Disc(3,1) inverts to Disc(3/8,1/8)");
  c.Expect(RegionDistance(Region{Disc{{0, 0}, 1}}, Region{Disc{{5, 0}, 1}}) == 3, "disc-disc distance 3");
  c.Expect(RegionDistance(Region{Disc{{0, 0}, 1}}, Region{Disc{{1, 0}, 1}}) == 0, "overlap distance 0");
  const Scalar dh = RegionDistance(Region{Disc{{2, 0}, 0.5}}, Region{HalfPlane{{-1, 0}, 1}});
  c.Expect(std::abs(dh - oracle::DiscHalfPlaneDistanceSampled({2, 0}, 0.5, {-1, 0}, 1)) <= 1e-9,
           "disc-halfplane distance vs sampled oracle");
  const Scalar dd = RegionDistance(Region{Disc{{0.3, 1}, 0.4}}, Region{Disc{{-1, -2}, 0.7}});
  const Scalar dd_oracle = oracle::DiscDiscDistanceSampled({0.3, 1}, 0.4, {-1, -2}, 0.7, 2000);
  c.Expect(dd <= dd_oracle + 1e-12 && dd_oracle - dd <= 1e-4, "disc-disc distance vs sampled oracle");
  c.Note("4 x " + std::to_string(kPoints) + " points; distances " + Num(dh) + ", " + Num(dd));
}

void Criterion5(Checks& c) {
  // -tau Disc(1, 0.25) = Disc(-tau, 0.25 tau): distance to Disc(2, 0.5) is 1.5 + 0.75 tau.
  const auto r = SeparationMargin(Region{Disc{{2, 0}, 0.5}}, Region{Disc{{1, 0}, 0.25}}, 1e-9, 1);
  c.Expect(std::abs(r.margin - 1.5) <= 1e-3 && r.margin <= 1.5, "margin 1.5 +- 1e-3");
  const auto t = SeparationMargin(Region{Disc{{2, 0}, 1}}, Region{Disc{{-0.5, 0}, 0.5}}, 1e-9, 1);
  c.Expect(t.margin == 0, "touching pair margin 0");
  c.Note("margin " + Num(r.margin) + " (" + std::to_string(r.evaluations) + " evaluations), touching " +
         Num(t.margin));
}

void Criterion6(Checks& c) {
  const OperatorSpec h1 = FirstOrderLag(0.5, 1).WithDeclaredGain(0.5);
  const OperatorSpec h2 = MakeScale(1.5, MakeStatic(NonlinearityKind::kTanh)).WithDeclaredGain(1.5);
  const Multiplier pi = SmallGainMultiplier(1.5);
  const auto grid = DefaultFrequencyGrid(SysOf(h1), 512);
  const auto pairs = ProbePairs(ProbeOptions{});

  const LtiConditionResult lti = CheckLtiCondition(h1, pi, grid);
  c.Expect(std::abs(lti.eps - 0.4375) <= 1e-4, "eps = 0.4375 +- 1e-4");
  const std::vector<Scalar> taus = {0, 0.25, 0.5, 0.75, 1};
  const EmpiricalIqcResult emp = CheckIncIqcEmpirical(h2, pi, pairs, taus);
  c.Expect(emp.passed && emp.minimum >= -1e-9 * emp.worst_scale, "trajectory IQC nonnegative");

  IqcOptions options;
  options.closed_loop_probes = pairs;
  const Verdict v = CertifyIqc(h1, h2, pi, grid, pairs, options);
  const Scalar expected = oracle::IqcBound(0.4375, 2.25, 0.5);
  c.Expect(IsCertified(v), "IQC route certifies");
  if (IsCertified(v)) {
    const auto& cert = std::get<Certificate>(v);
    c.Expect(std::abs(cert.gamma - expected) <= 1e-6 * expected, "bound matches recomputation");
    c.Expect(std::abs(cert.gamma - 7.12) <= 0.01, "bound ~ 7.12");
    c.Expect(cert.empirical.ran && cert.empirical.max_ratio <= cert.gamma, "bound dominates empirical gain");
    c.Note("eps " + Num(lti.eps) + ", bound " + Num(cert.gamma) + ", empirical " + Num(cert.empirical.max_ratio));
  }

  const LtiConditionResult passive = CheckLtiCondition(FirstOrderLag(1, 1), PassivityMultiplier(), grid);
  c.Expect(!passive.passed && passive.eps < 0, "passivity on 1/(s+1) fails with eps < 0");
  const OperatorSpec gain2 = Gain(2).WithDeclaredGain(2);
  const Verdict f = CertifyIqc(h1, gain2, pi, grid, pairs);
  c.Expect(!IsCertified(f) && std::get<Refusal>(f).reason.find("falsified") != std::string::npos,
           "gain-2 nonlinearity falsifies the trajectory IQC");
  c.Note("passivity eps " + Num(passive.eps));
}

void Criterion7(Checks& c) {
  const Signal u = Constant(1, 50, 0.1);
  for (auto [g1, g2] : std::vector<std::pair<Scalar, Scalar>>{{0.8, 1}, {0.5, 1.5}}) {
    for (Scalar tau : {0.25, 0.5, 1.0}) {
      const FeedbackSolution s = SolveFeedback(u, Gain(g1), Gain(g2), tau);
      const Scalar expected = tau * g1 * g2;
      c.Expect(std::abs(s.trace.contraction_estimate - expected) <= 0.1 * expected,
               "contraction " + Num(s.trace.contraction_estimate) + " vs " + Num(expected));
    }
  }
  // A dynamic loop contracts no faster than the static bound predicts.
  const FeedbackSolution d = SolveFeedback(Constant(1, 400, 0.05), FirstOrderLag(0.8, 1), Gain(1), 1);
  c.Expect(d.trace.contraction_estimate <= 0.8 * 1.1, "lag loop contraction <= 1.1 tau g1 g2");
  c.Note("lag loop estimate " + Num(d.trace.contraction_estimate));
}

void Criterion8(Checks& c) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<Index> length(16, 400);
  std::uniform_real_distribution<Scalar> dt(0.005, 0.2), eps(0.01, 10), mix(0, 1);
  const Multiplier identity = ConstantMultiplier(ComplexMatrix::Identity(2, 2), 1, 1);
  Scalar worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Signal x = RandomSignal(rng, length(rng), 2, dt(rng));
    const Scalar energy = x.samples().squaredNorm() * x.dt();
    worst = std::max(worst, std::abs(SigmaForm(identity, x) - energy) / energy);
  }
  c.Expect(worst <= 1e-9, "identity multiplier sigma = ||x||^2");

  ComplexMatrix h(2, 2);
  h << Complex(1.2, 0), Complex(0.3, -0.8), Complex(0.3, 0.8), Complex(-2, 0);
  const Multiplier pi = ConstantMultiplier(h, 1, 1);
  const Scalar m = FormBound(pi);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const Index n = length(rng);
    const Scalar step = dt(rng);
    const Signal x = RandomSignal(rng, n, 2, step);
    const Signal y = x + (std::pow(10.0, 3 * mix(rng) - 2)) * RandomSignal(rng, n, 2, step);
    const Scalar e = eps(rng);
    const Scalar cst = QuadraticContinuityConstant(m, e);
    const Scalar lhs = SigmaForm(pi, y);
    const Scalar rhs = SigmaForm(pi, x) + e * std::pow(Norm(x), 2) + cst * std::pow(Norm(x - y), 2);
    if (lhs > rhs + 1e-9 * (1 + std::abs(rhs))) ++violations;
  }
  c.Expect(violations == 0, "quadratic continuity on 1000 triples");
  c.Note("worst relative normalization error " + Num(worst) + ", M = " + Num(m));
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Criterion9(Checks& c) {
  const fs::path root = fs::temp_directory_path() / "incstab_acceptance";
  fs::remove_all(root);
  int configs = 0;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(kSource / "configs")) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& cfg : files) {
    std::ostringstream sink;
    const int a = RunCommand(cfg, root / "one", sink, sink);
    const int b = RunCommand(cfg, root / "two", sink, sink);
    c.Expect(a == b && a != kExitError, cfg.filename().string() + " exit codes " + std::to_string(a) + "/" +
                                            std::to_string(b));
    ++configs;
  }
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "one")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "one");
    c.Expect(Slurp(entry.path()) == Slurp(root / "two" / rel), rel.string() + " identical");
    ++compared;
  }
  c.Expect(compared > 0, "artifacts produced");
  fs::remove_all(root);
  c.Note(std::to_string(configs) + " configs, " + std::to_string(compared) + " artifacts byte-identical");
}

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  void (*run)(Checks&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "arctan counterexample blow-up", 10, Criterion1},
      {2, "small-gain certificate dominance", 5, Criterion2},
      {3, "feedback splitting identity", 10, Criterion3},
      {4, "region algebra soundness", 10, Criterion4},
      {5, "tau-sweep separation margin", 5, Criterion5},
      {6, "IQC route end to end", 30, Criterion6},
      {7, "Picard contraction rate", 5, Criterion7},
      {8, "normalization and quadratic continuity", 10, Criterion8},
      {9, "determinism of shipped configs", 600, Criterion9},
  };
  int failed = 0;
  for (const auto& k : criteria) {
    Checks checks;
    const auto start = std::chrono::steady_clock::now();
    try {
      k.run(checks);
    } catch (const std::exception& e) {
      checks.Expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    checks.Expect(seconds <= k.budget_seconds, "runtime budget " + Num(k.budget_seconds) + " s");
    std::printf("%s criterion %d: %s [%.2f s] %s\n", checks.ok() ? "PASS" : "FAIL", k.id, k.title, seconds,
                checks.Summary().c_str());
    std::fflush(stdout);
    if (!checks.ok()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
