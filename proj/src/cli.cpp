#include "incstab/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <json.hpp>

#include "incstab/report.hpp"
#include "incstab/svg.hpp"

namespace incstab {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ordered_json Finite(Scalar v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

fs::path Resolve(const fs::path& out_dir, const fs::path& p) {
  return out_dir.empty() || p.is_absolute() ? p : out_dir / p;
}

RunInfo Info(const JobConfig& cfg) { return RunInfo{cfg.job, cfg.seed, cfg.timestamp}; }

void PrintVerdict(const Verdict& v, std::ostream& out) {
  if (const auto* c = std::get_if<Certificate>(&v)) {
    out << "certified (" << ToString(c->route) << ", " << ToString(c->mode)
        << "): incremental gain bound " << c->gamma << ", r_min " << c->r_min << ", schedule nu "
        << c->schedule.nu << " tau_step " << c->schedule.tau_step << " steps " << c->schedule.steps
        << '\n';
  } else {
    const auto& r = std::get<Refusal>(v);
    out << "refused (" << ToString(r.route) << ", " << ToString(r.mode) << "): " << r.reason << '\n';
  }
}

int EmitVerdict(const Verdict& v, const JobConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  if (cfg.outputs.certificate) {
    WriteFileAtomic(Resolve(out_dir, *cfg.outputs.certificate), CertificateJson(v, Info(cfg)));
  }
  PrintVerdict(v, out);
  return ExitCode(v);
}

void WriteSummary(const ordered_json& body, const JobConfig& cfg, const fs::path& out_dir) {
  if (!cfg.outputs.certificate) return;
  ordered_json doc{{"job", cfg.job}, {"seed", cfg.seed}, {"timestamp", cfg.timestamp}};
  for (const auto& [key, value] : body.items()) doc[key] = value;
  WriteFileAtomic(Resolve(out_dir, *cfg.outputs.certificate), doc.dump(2) + "\n");
}

int RunSmallGain(const JobConfig& cfg, const SmallGainJob& p, const fs::path& out_dir, std::ostream& out) {
  const Scalar g1 = p.gamma1 ? *p.gamma1 : *cfg.systems.at(p.h1).declared_inc_gain();
  const Scalar g2 = p.gamma2 ? *p.gamma2 : *cfg.systems.at(p.h2).declared_inc_gain();
  return EmitVerdict(CheckSmallGain(g1, g2), cfg, out_dir, out);
}

int RunSrg(const JobConfig& cfg, const SrgJob& p, const fs::path& out_dir, std::ostream& out) {
  const OperatorSpec& h1 = cfg.systems.at(p.h1);
  const OperatorSpec& h2 = cfg.systems.at(p.h2);
  CertifyOptions options;
  options.separation = p.separation;
  options.solve = p.solve;
  if (p.cross_check) options.probes = ProbePairs(p.probes);
  const Verdict v = p.relaxed ? CertifyRelaxed(h1, h2, p.assume_well_posed, options)
                              : CertifySrg(h1, h2, options);
  if (cfg.outputs.svg) {
    const Region shown = Unite(InvertRegion(SymmetrizeRegion(*h1.declared_srg())),
                               NegateRegion(ChordClosure(SymmetrizeRegion(*h2.declared_srg()))));
    WriteFileAtomic(Resolve(out_dir, *cfg.outputs.svg),
                    SrgSvg(SrgCloud{}, shown, cfg.seed, "inverse SRG of h1 and -SRG of h2 (chord-closed)"));
  }
  return EmitVerdict(v, cfg, out_dir, out);
}

int RunIqc(const JobConfig& cfg, const IqcJob& p, const fs::path& out_dir, std::ostream& out) {
  const OperatorSpec& h1 = cfg.systems.at(p.h1);
  const OperatorSpec& h2 = cfg.systems.at(p.h2);
  const auto& sys = std::get<LtiNode>(h1.node().value).sys;
  IqcOptions options;
  options.tau_grid = p.tau_grid;
  options.solve = p.solve;
  if (p.cross_check) {
    ProbeOptions loop = p.probes;
    loop.dim = sys.inputs();
    options.closed_loop_probes = ProbePairs(loop);
  }
  const Verdict v = CertifyIqc(h1, h2, p.multiplier, DefaultFrequencyGrid(sys, p.grid_points),
                               ProbePairs(p.probes), options);
  return EmitVerdict(v, cfg, out_dir, out);
}

Signal BuildInput(const InputSpec& in, Index dim) {
  if (in.kind == InputKind::kCsv) {
    Signal s = ReadSignalCsv(in.csv);
    if (s.dim() != dim) {
      throw std::invalid_argument("input CSV has " + std::to_string(s.dim()) + " channels, h1 expects " +
                                  std::to_string(dim));
    }
    return s;
  }
  const Index n = static_cast<Index>(std::llround(in.horizon / in.dt));
  Matrix m(n, dim);
  for (Index k = 0; k < n; ++k) {
    const Scalar t = static_cast<Scalar>(k) * in.dt;
    Scalar v = 0;
    switch (in.kind) {
      case InputKind::kStep:
        v = in.amplitude;
        break;
      case InputKind::kSine:
        v = in.amplitude * std::sin(in.omega * t);
        break;
      case InputKind::kPulse:
        v = t < in.width ? in.amplitude : 0;
        break;
      case InputKind::kCsv:
        break;
    }
    m.row(k).setConstant(v);
  }
  return Signal(std::move(m), in.dt);
}

int RunSimulate(const JobConfig& cfg, const SimulateJob& p, const fs::path& out_dir, std::ostream& out) {
  const OperatorSpec& h1 = cfg.systems.at(p.h1);
  const OperatorSpec& h2 = cfg.systems.at(p.h2);
  const Signal u = BuildInput(p.input, h1.input_dim() == 0 ? 1 : h1.input_dim());
  FeedbackSolution sol{u, u, {}};
  try {
    sol = SolveFeedback(u, h1, h2, p.tau, p.solve);
  } catch (const DivergenceError& e) {
    out << "diverged after " << e.trace().iterates << " iterations: " << e.what() << '\n';
    return kExitRefused;
  }
  if (cfg.outputs.csv) {
    WriteFileAtomic(Resolve(out_dir, *cfg.outputs.csv), FormatTrajectoryCsv(u, sol, cfg.seed));
  }
  WriteSummary(ordered_json{{"converged", sol.trace.converged},
                            {"iterates", sol.trace.iterates},
                            {"contraction_estimate", Finite(sol.trace.contraction_estimate)},
                            {"equation_residual", Finite(sol.trace.equation_residual)},
                            {"input_norm", Norm(u)},
                            {"output_norm", Norm(sol.y)}},
               cfg, out_dir);
  out << "converged in " << sol.trace.iterates << " iterations, contraction estimate "
      << sol.trace.contraction_estimate << ", ||y|| = " << Norm(sol.y) << '\n';
  return kExitOk;
}

int RunSrgSample(const JobConfig& cfg, const SrgSampleJob& p, const fs::path& out_dir, std::ostream& out) {
  const OperatorSpec& op = cfg.systems.at(p.system);
  const SrgCloud cloud = SampleSrg(op, ProbePairs(p.probes));
  if (cfg.outputs.csv) WriteFileAtomic(Resolve(out_dir, *cfg.outputs.csv), FormatCloudCsv(cloud, cfg.seed));
  if (cfg.outputs.svg) {
    WriteFileAtomic(Resolve(out_dir, *cfg.outputs.svg),
                    SrgSvg(cloud, op.declared_srg().value_or(Region{}), cfg.seed,
                           "sampled SRG of " + p.system));
  }
  std::size_t outside = 0;
  if (op.declared_srg()) {
    for (const Complex& z : cloud.points) outside += op.declared_srg()->Contains(z, 1e-9) ? 0 : 1;
  }
  WriteSummary(ordered_json{{"system", p.system},
                            {"points", cloud.points.size()},
                            {"max_radius", MaxRadius(cloud)},
                            {"outside_declared", outside}},
               cfg, out_dir);
  out << cloud.points.size() << " SRG points, max radius " << MaxRadius(cloud);
  if (op.declared_srg()) out << ", " << outside << " outside the declared region";
  out << '\n';
  return outside == 0 ? kExitOk : kExitRefused;
}

int RunArctan(const JobConfig& cfg, const ArctanJob& p, const fs::path& out_dir, std::ostream& out) {
  const auto rows = ArctanExperiment(p.amplitudes, p.options);
  const Scalar slope = rows.size() >= 2 ? LogLogSlope(rows) : std::nan("");
  if (cfg.outputs.csv) WriteFileAtomic(Resolve(out_dir, *cfg.outputs.csv), FormatArctanCsv(rows, cfg.seed));
  if (cfg.outputs.svg) WriteFileAtomic(Resolve(out_dir, *cfg.outputs.svg), ArctanSvg(rows, cfg.seed));
  ordered_json table = ordered_json::array();
  for (const auto& r : rows) {
    table.push_back(ordered_json{{"amplitude", r.amplitude},
                                 {"ratio", r.ratio},
                                 {"output_level", r.output_level},
                                 {"srg_radius", r.srg_radius}});
  }
  WriteSummary(ordered_json{{"loglog_slope", Finite(slope)}, {"rows", table}}, cfg, out_dir);
  for (const auto& r : rows) out << "a = " << r.amplitude << ": ratio " << r.ratio << '\n';
  if (std::isfinite(slope)) out << "log-log slope " << slope << '\n';
  return kExitOk;
}

}  // namespace

int RunJob(const JobConfig& config, const fs::path& out_dir, std::ostream& out) {
  return std::visit(
      [&](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SmallGainJob>) return RunSmallGain(config, p, out_dir, out);
        if constexpr (std::is_same_v<T, SrgJob>) return RunSrg(config, p, out_dir, out);
        if constexpr (std::is_same_v<T, IqcJob>) return RunIqc(config, p, out_dir, out);
        if constexpr (std::is_same_v<T, SimulateJob>) return RunSimulate(config, p, out_dir, out);
        if constexpr (std::is_same_v<T, SrgSampleJob>) return RunSrgSample(config, p, out_dir, out);
        if constexpr (std::is_same_v<T, ArctanJob>) return RunArctan(config, p, out_dir, out);
      },
      config.parameters);
}

int RunCommand(const fs::path& config, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    return RunJob(LoadConfig(config), out_dir, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int ValidateCommand(const fs::path& config, std::ostream& out, std::ostream& err) {
  try {
    const JobConfig cfg = LoadConfig(config);
    out << "ok: job " << cfg.job << ", " << cfg.systems.size() << " systems, seed " << cfg.seed << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int PlotCommand(const fs::path& cloud_csv, const std::vector<std::string>& regions,
                const fs::path& svg, std::ostream& out, std::ostream& err) {
  try {
    const SrgCloud cloud = ReadCloudCsv(cloud_csv);
    std::vector<Primitive> prims;
    for (const auto& literal : regions) prims.push_back(ParseRegionLiteral(literal));
    WriteFileAtomic(svg, SrgSvg(cloud, Region(std::move(prims)), 0));
    out << "wrote " << svg.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int CliMain(int argc, char** argv) {
  CLI::App app{"Incremental stability certificates for feedback interconnections"};
  app.require_subcommand(1);

  std::string run_config, out_dir;
  auto* run = app.add_subcommand("run", "Run the job described by a configuration file");
  run->add_option("config", run_config, "Configuration JSON")->required();
  run->add_option("--out-dir", out_dir, "Base directory for relative output paths");

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a configuration file without running it");
  validate->add_option("config", validate_config, "Configuration JSON")->required();

  std::vector<std::string> plot_args;
  auto* plot = app.add_subcommand("plot", "Plot an SRG cloud CSV with optional region literals");
  plot->add_option("args", plot_args, "<cloud.csv> [region literals...] <out.svg>")->expected(2, -1)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  if (*run) return RunCommand(run_config, out_dir, std::cout, std::cerr);
  if (*validate) return ValidateCommand(validate_config, std::cout, std::cerr);
  const std::vector<std::string> regions(plot_args.begin() + 1, plot_args.end() - 1);
  return PlotCommand(plot_args.front(), regions, plot_args.back(), std::cout, std::cerr);
}

}  // namespace incstab
