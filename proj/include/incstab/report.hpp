#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "incstab/certify.hpp"
#include "incstab/loop.hpp"
#include "incstab/srg.hpp"

namespace incstab {

/// Provenance echoed into every artifact. Nothing here is read from the clock.
struct RunInfo {
  std::string job;
  std::uint64_t seed = 0;
  std::string timestamp = "unspecified";
};

/// Pretty-printed JSON, newline-terminated; non-finite numbers become null.
std::string CertificateJson(const Verdict& verdict, const RunInfo& info);

/// 0 for a certificate, 1 for a refusal.
int ExitCode(const Verdict& verdict);

/// Writes to a sibling temporary file and renames it over `path`, creating
/// parent directories. Throws std::runtime_error on I/O failure.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& content);

/// `# seed: <seed>` comment line followed by `re,im` rows.
std::string FormatCloudCsv(const SrgCloud& cloud, std::uint64_t seed);
/// Reads `re,im` rows; lines starting with '#' are skipped.
SrgCloud ReadCloudCsv(const std::filesystem::path& path);

std::string FormatArctanCsv(const std::vector<ArctanRow>& rows, std::uint64_t seed);

/// Columns t, u1.., e1.., y1..
std::string FormatTrajectoryCsv(const Signal& u, const FeedbackSolution& solution,
                                std::uint64_t seed);

/// Fixed 17-significant-digit rendering used by every CSV writer.
std::string FormatNumber(Scalar v);

}  // namespace incstab
