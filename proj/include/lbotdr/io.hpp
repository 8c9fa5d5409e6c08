#pragma once

// File formats.
//
// Profile (text):
//   # format: lbotdr-profile v1
//   # sample_spacing_m: 1
//   # n_samples: 5000
//   # units: dB
//   # ground_truth: run-0001.truth.json      (optional)
//   -0.0001
//   ...
//
// Ground truth and event lists are JSON objects carrying a "format" tag.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lbotdr/evaluation.hpp"
#include "lbotdr/simulator.hpp"
#include "lbotdr/types.hpp"

namespace lbotdr::io {

inline constexpr const char* kProfileFormat = "lbotdr-profile v1";
inline constexpr const char* kTruthFormat = "lbotdr-truth v1";
inline constexpr const char* kEventsFormat = "lbotdr-events v1";
inline constexpr const char* kReportFormat = "lbotdr-report v1";

enum class ErrorKind { Unreadable, Schema, NonFinite, Unwritable };

class IoError : public std::runtime_error {
public:
    IoError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ProfileFile {
    Profile profile;
    std::optional<std::string> ground_truth;
};

ProfileFile parse_profile(std::istream& in, const std::string& origin = "<stream>");
ProfileFile read_profile(const std::filesystem::path& path);
void write_profile(std::ostream& out, const ProfileFile& file);
void write_profile(const std::filesystem::path& path, const ProfileFile& file);

struct GroundTruth {
    FiberSpec fiber;
    double sigma = DictionaryShape::kDefaultSigma;
    CoefficientVector beta;   // dictionary units, n_samples + 1 entries
};

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const nlohmann::json& j);
GroundTruth read_ground_truth(const std::filesystem::path& path);

struct EventFileMetadata {
    std::optional<double> lambda_best;
    std::size_t first_iterations = 0;   // N_c
    std::size_t total_iterations = 0;
    std::optional<double> elapsed_seconds;
    std::string detector = "lbi";
    std::string kernel;
};

nlohmann::json to_json(const EventList& events, double sample_spacing_m, const EventFileMetadata& meta);
/// Validates the format tag and ascending positions.
EventList event_list_from_json(const nlohmann::json& j, double* sample_spacing_m = nullptr);

/// Timing fields are left out when include_timing is false so that reruns
/// compare byte for byte.
nlohmann::json to_json(const BenchmarkReport& report, bool include_timing);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lbotdr::io
