#include "lbotdr/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lbotdr::io {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void schema(const std::string& origin, const std::string& what) {
    throw IoError(ErrorKind::Schema, origin + ": " + what);
}

double parse_double(const std::string& text, const std::string& origin, std::size_t line) {
    // strtod accepts "nan" / "inf", which we want to classify separately
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') {
        schema(origin, "line " + std::to_string(line) + ": not a number: '" + text + "'");
    }
    if (!std::isfinite(v)) {
        throw IoError(ErrorKind::NonFinite, origin + ": line " + std::to_string(line) + ": non-finite sample");
    }
    return v;
}

std::size_t parse_count(const std::string& text, const std::string& origin) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        schema(origin, "bad count '" + text + "'");
    }
    return v;
}

void require_format(const json& j, const char* tag, const std::string& origin) {
    if (!j.is_object() || !j.contains("format") || j["format"] != tag) {
        schema(origin, std::string("expected format '") + tag + "'");
    }
}

std::string crn_domain_name(CrnDomain d) {
    switch (d) {
        case CrnDomain::Counts:
            return "counts";
        case CrnDomain::LinearPower:
            return "linear_power";
        case CrnDomain::Decibel:
            return "db";
    }
    return "counts";
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const Metrics& m) {
    return json{{"sensitivity", optional_number(m.sensitivity)},
                {"specificity", optional_number(m.specificity)},
                {"accuracy", optional_number(m.accuracy)},
                {"precision", optional_number(m.precision)}};
}

json table_json(const ContingencyTable& t) { return json{{"tp", t.tp}, {"fp", t.fp}, {"tn", t.tn}, {"fn", t.fn}}; }

json summary_json(const LengthSummary& s, bool include_timing) {
    json j{{"length", s.length},
           {"profiles", s.profiles},
           {"failures", s.failures},
           {"contingency", table_json(s.table)},
           {"metrics", metrics_json(s.metrics)},
           {"mean_squared_error", s.mean_squared_error},
           {"fp_histogram", json{{"bin_width", s.fp_histogram.bin_width}, {"counts", s.fp_histogram.counts}}}};
    if (include_timing) {
        j["mean_seconds"] = s.mean_seconds;
    }
    return j;
}

}  // namespace

ProfileFile parse_profile(std::istream& in, const std::string& origin) {
    ProfileFile out;
    std::optional<std::string> format;
    std::optional<double> spacing;
    std::optional<std::size_t> declared;
    std::string line;
    std::size_t lineno = 0;
    bool in_header = true;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.front() == '#') {
            if (!in_header) {
                continue;   // comments after the data are allowed and ignored
            }
            const std::string body = trim(std::string_view(t).substr(1));
            const auto colon = body.find(':');
            if (colon == std::string::npos) {
                continue;
            }
            const std::string key = trim(std::string_view(body).substr(0, colon));
            const std::string value = trim(std::string_view(body).substr(colon + 1));
            if (key == "format") {
                format = value;
            } else if (key == "sample_spacing_m") {
                spacing = parse_double(value, origin, lineno);
            } else if (key == "n_samples") {
                declared = parse_count(value, origin);
            } else if (key == "units") {
                if (value != "dB") {
                    schema(origin, "units must be dB");
                }
            } else if (key == "ground_truth") {
                out.ground_truth = value;
            }
            continue;
        }
        in_header = false;
        out.profile.samples.push_back(parse_double(t, origin, lineno));
    }
    if (in.bad()) {
        throw IoError(ErrorKind::Unreadable, origin + ": read error");
    }
    if (format != kProfileFormat) {
        schema(origin, std::string("missing or unknown format tag (want '") + kProfileFormat + "')");
    }
    if (!spacing || !(*spacing > 0.0)) {
        schema(origin, "sample_spacing_m missing or not positive");
    }
    if (!declared) {
        schema(origin, "n_samples missing");
    }
    if (*declared != out.profile.size()) {
        schema(origin, "header declares " + std::to_string(*declared) + " samples, file has " +
                           std::to_string(out.profile.size()));
    }
    if (out.profile.size() < 2) {
        schema(origin, "profile needs at least 2 samples");
    }
    out.profile.sample_spacing_m = *spacing;
    return out;
}

ProfileFile read_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(ErrorKind::Unreadable, "cannot open " + path.string());
    }
    return parse_profile(in, path.string());
}

void write_profile(std::ostream& out, const ProfileFile& file) {
    out << "# format: " << kProfileFormat << '\n';
    out << "# sample_spacing_m: " << file.profile.sample_spacing_m << '\n';
    out << "# n_samples: " << file.profile.size() << '\n';
    out << "# units: dB\n";
    if (file.ground_truth) {
        out << "# ground_truth: " << *file.ground_truth << '\n';
    }
    char buf[32];
    for (const double v : file.profile.samples) {
        // shortest round-trip representation
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, res.ptr - buf);
        out.put('\n');
    }
}

void write_profile(const std::filesystem::path& path, const ProfileFile& file) {
    std::ostringstream ss;
    write_profile(ss, file);
    write_text(path, ss.str());
}

nlohmann::json to_json(const GroundTruth& truth) {
    json events = json::array();
    for (const FaultEvent& e : truth.fiber.events) {
        events.push_back(json{{"position_index", e.position},
                              {"position_m", static_cast<double>(e.position) * truth.fiber.sample_spacing_m},
                              {"loss_db", e.loss_db}});
    }
    return json{{"format", kTruthFormat},
                {"n_samples", truth.fiber.n_samples},
                {"sample_spacing_m", truth.fiber.sample_spacing_m},
                {"attenuation_db_per_km", truth.fiber.attenuation_db_per_km},
                {"sigma", truth.sigma},
                {"events", events}};
}

GroundTruth ground_truth_from_json(const nlohmann::json& j) {
    const std::string origin = "ground truth";
    require_format(j, kTruthFormat, origin);
    try {
        GroundTruth t;
        t.fiber.n_samples = j.at("n_samples").get<std::size_t>();
        t.fiber.sample_spacing_m = j.at("sample_spacing_m").get<double>();
        t.fiber.attenuation_db_per_km = j.at("attenuation_db_per_km").get<double>();
        t.sigma = j.at("sigma").get<double>();
        for (const json& e : j.at("events")) {
            t.fiber.events.push_back(FaultEvent{e.at("position_index").get<std::size_t>(), e.at("loss_db").get<double>()});
        }
        const DictionaryShape shape = DictionaryShape::for_samples(t.fiber.n_samples, t.sigma);
        t.beta = synth_clean_profile(t.fiber, shape).beta;
        return t;
    } catch (const json::exception& e) {
        schema(origin, e.what());
    } catch (const InvalidArgument& e) {
        schema(origin, e.what());
    }
}

GroundTruth read_ground_truth(const std::filesystem::path& path) { return ground_truth_from_json(read_json(path)); }

nlohmann::json to_json(const EventList& events, double sample_spacing_m, const EventFileMetadata& meta) {
    json list = json::array();
    for (const Event& e : events.events) {
        list.push_back(json{{"position_index", e.position_index}, {"position_m", e.position_m}, {"loss_db", e.loss_db}});
    }
    json solver{{"detector", meta.detector},
                {"lambda_best", optional_number(meta.lambda_best)},
                {"first_iterations", meta.first_iterations},
                {"total_iterations", meta.total_iterations}};
    if (!meta.kernel.empty()) {
        solver["kernel"] = meta.kernel;
    }
    if (meta.elapsed_seconds) {
        solver["elapsed_seconds"] = *meta.elapsed_seconds;
    }
    return json{{"format", kEventsFormat},
                {"sample_spacing_m", sample_spacing_m},
                {"slope_db_per_km", events.slope_db_per_sample / sample_spacing_m * 1000.0},
                {"events", list},
                {"solver", solver}};
}

EventList event_list_from_json(const nlohmann::json& j, double* sample_spacing_m) {
    const std::string origin = "event list";
    require_format(j, kEventsFormat, origin);
    try {
        EventList out;
        const double spacing = j.at("sample_spacing_m").get<double>();
        if (!(spacing > 0.0)) {
            schema(origin, "sample_spacing_m must be positive");
        }
        out.slope_db_per_sample = j.at("slope_db_per_km").get<double>() * spacing / 1000.0;
        for (const json& e : j.at("events")) {
            Event ev{e.at("position_index").get<std::size_t>(), e.at("position_m").get<double>(),
                     e.at("loss_db").get<double>()};
            if (!out.events.empty() && ev.position_index <= out.events.back().position_index) {
                schema(origin, "event positions must be strictly ascending");
            }
            out.events.push_back(ev);
        }
        if (sample_spacing_m != nullptr) {
            *sample_spacing_m = spacing;
        }
        return out;
    } catch (const json::exception& e) {
        schema(origin, e.what());
    }
}

nlohmann::json to_json(const BenchmarkReport& report, bool include_timing) {
    const TestbenchSpec& s = report.spec;
    json spec{{"lengths", s.lengths},
              {"profiles_per_length", s.profiles_per_length},
              {"faults_per_profile", s.faults_per_profile},
              {"loss_range_db", json::array({s.min_loss_db, s.max_loss_db})},
              {"min_separation", s.min_separation},
              {"sample_spacing_m", s.sample_spacing_m},
              {"attenuation_db_per_km", s.attenuation_db_per_km},
              {"sigma", s.sigma},
              {"seed", s.seed},
              {"noise",
               json{{"c0", s.noise.c0},
                    {"delta_nu_hz", s.noise.delta_nu_hz},
                    {"v_g_m_s", s.noise.v_g_m_s},
                    {"delta_z_m", s.noise.delta_z_m},
                    {"crn_domain", crn_domain_name(s.noise.crn_domain)}}}};
    json detectors = json::array();
    for (const DetectorReport& d : report.detectors) {
        json lengths = json::array();
        for (const LengthSummary& l : d.lengths) {
            lengths.push_back(summary_json(l, include_timing));
        }
        json profiles = json::array();
        for (const ProfileOutcome& o : d.profiles) {
            json p{{"length", o.length}, {"replicate", o.replicate}};
            if (o.failed) {
                p["error"] = o.error;
            } else {
                p["contingency"] = table_json(o.table);
                p["squared_error"] = o.squared_error;
                p["lambda_best"] = optional_number(o.lambda_best);
                p["iterations"] = o.iterations;
                if (include_timing) {
                    p["seconds"] = o.seconds;
                }
            }
            profiles.push_back(std::move(p));
        }
        detectors.push_back(json{{"detector", d.detector},
                                 {"overall", summary_json(d.overall, include_timing)},
                                 {"lengths", lengths},
                                 {"profiles", profiles}});
    }
    json out{{"format", kReportFormat}, {"testbench", spec}, {"detectors", detectors}};
    if (include_timing) {
        out["kernel"] = report.kernel;
    }
    return out;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(ErrorKind::Unreadable, "cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        schema(path.string(), e.what());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(ErrorKind::Unwritable, "cannot write " + path.string());
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError(ErrorKind::Unwritable, "write failed for " + path.string());
    }
}

}  // namespace lbotdr::io
