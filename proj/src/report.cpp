#include "incstab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace incstab {

namespace {

using nlohmann::ordered_json;

ordered_json Number(Scalar v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json DetailsJson(const Details& details) {
  ordered_json out = ordered_json::object();
  for (const auto& [key, value] : details) out[key] = Number(value);
  return out;
}

ordered_json ScheduleJson(const HomotopySchedule& s) {
  return ordered_json{{"nu", Number(s.nu)},         {"tau_step", Number(s.tau_step)},
                      {"steps", s.steps},           {"gamma1", Number(s.gamma1)},
                      {"gamma2", Number(s.gamma2)}, {"gamma", Number(s.gamma)}};
}

ordered_json Header(const RunInfo& info) {
  return ordered_json{{"job", info.job}, {"seed", info.seed}, {"timestamp", info.timestamp}};
}

}  // namespace

std::string CertificateJson(const Verdict& verdict, const RunInfo& info) {
  ordered_json doc = Header(info);
  if (const auto* c = std::get_if<Certificate>(&verdict)) {
    doc["verdict"] = "certified";
    doc["route"] = ToString(c->route);
    doc["mode"] = ToString(c->mode);
    doc["r_min"] = Number(c->r_min);
    doc["gamma"] = Number(c->gamma);
    doc["schedule"] = ScheduleJson(c->schedule);
    doc["premises"] = c->premises;
    doc["empirical"] = ordered_json{{"ran", c->empirical.ran},
                                    {"max_ratio", Number(c->empirical.max_ratio)},
                                    {"pairs", c->empirical.pairs}};
    doc["details"] = DetailsJson(c->details);
  } else {
    const auto& r = std::get<Refusal>(verdict);
    doc["verdict"] = "refused";
    doc["route"] = ToString(r.route);
    doc["mode"] = ToString(r.mode);
    doc["reason"] = r.reason;
    doc["tau_star"] = r.tau_star ? Number(*r.tau_star) : ordered_json(nullptr);
    doc["witness"] = r.witness;
    doc["premises"] = r.premises;
    doc["details"] = DetailsJson(r.details);
  }
  return doc.dump(2) + "\n";
}

int ExitCode(const Verdict& verdict) { return IsCertified(verdict) ? 0 : 1; }

void WriteFileAtomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + temp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(temp, ignored);
      throw std::runtime_error("failed writing " + temp.string());
    }
  }
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(temp, ignored);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string FormatNumber(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string FormatCloudCsv(const SrgCloud& cloud, std::uint64_t seed) {
  std::ostringstream out;
  out << "# seed: " << seed << "\nre,im\n";
  for (const Complex& z : cloud.points) {
    out << FormatNumber(z.real()) << ',' << FormatNumber(z.imag()) << '\n';
  }
  return out.str();
}

SrgCloud ReadCloudCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  SrgCloud cloud;
  std::string line;
  bool header = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("re,im", 0) != 0) {
        throw std::runtime_error(path.string() + ": expected header 're,im'");
      }
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string re, im;
    if (!std::getline(row, re, ',') || !std::getline(row, im, ',')) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected re,im");
    }
    try {
      std::size_t used_re = 0, used_im = 0;
      const Scalar x = std::stod(re, &used_re);
      const Scalar y = std::stod(im, &used_im);
      if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("non-finite");
      cloud.points.emplace_back(x, y);
      cloud.source_pairs.push_back(cloud.points.size() - 1);
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  if (!header) throw std::runtime_error(path.string() + ": missing header 're,im'");
  return cloud;
}

std::string FormatArctanCsv(const std::vector<ArctanRow>& rows, std::uint64_t seed) {
  std::ostringstream out;
  out << "# seed: " << seed << "\na,ratio,output_level,srg_radius\n";
  for (const auto& r : rows) {
    out << FormatNumber(r.amplitude) << ',' << FormatNumber(r.ratio) << ','
        << FormatNumber(r.output_level) << ',' << FormatNumber(r.srg_radius) << '\n';
  }
  return out.str();
}

std::string FormatTrajectoryCsv(const Signal& u, const FeedbackSolution& solution,
                                std::uint64_t seed) {
  std::ostringstream out;
  out << "# seed: " << seed << "\nt";
  for (Index i = 0; i < u.dim(); ++i) out << ",u" << i + 1;
  for (Index i = 0; i < solution.e.dim(); ++i) out << ",e" << i + 1;
  for (Index i = 0; i < solution.y.dim(); ++i) out << ",y" << i + 1;
  out << '\n';
  for (Index k = 0; k < u.length(); ++k) {
    out << FormatNumber(u.time(k));
    for (Index i = 0; i < u.dim(); ++i) out << ',' << FormatNumber(u.samples()(k, i));
    for (Index i = 0; i < solution.e.dim(); ++i) out << ',' << FormatNumber(solution.e.samples()(k, i));
    for (Index i = 0; i < solution.y.dim(); ++i) out << ',' << FormatNumber(solution.y.samples()(k, i));
    out << '\n';
  }
  return out.str();
}

}  // namespace incstab
