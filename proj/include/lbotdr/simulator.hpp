#pragma once

// Synthetic OTDR traces: clean slope + step profile from a sparse coefficient
// vector, then photon-counting noise, then coherent Rayleigh noise (CRN).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "lbotdr/dictionary.hpp"
#include "lbotdr/types.hpp"

namespace lbotdr {

struct FaultEvent {
    std::size_t position = 0;  // 1-based sample where the loss first shows, 2..n
    double loss_db = 0.0;      // > 0
};

struct FiberSpec {
    std::size_t n_samples = 0;
    double sample_spacing_m = 1.0;
    double attenuation_db_per_km = 0.2;
    std::vector<FaultEvent> events;   // ascending, unique positions

    void validate() const;
    double length_m() const { return static_cast<double>(n_samples) * sample_spacing_m; }
};

/// Where the CRN term enters the trace.
enum class CrnDomain {
    Counts,       // additive Gaussian on the detected photon counts, std sigma_crn counts
    LinearPower,  // multiplicative (1 + sigma_crn g) on linear power
    Decibel,      // additive Gaussian on the dB trace, std sigma_crn dB
};

struct NoiseSpec {
    double c0 = 1e5;              // photon counts at the fiber start
    double delta_nu_hz = 1e5;     // source linewidth
    double v_g_m_s = 2e8;         // group velocity
    double delta_z_m = 0.0;       // CRN length scale; 0 means the fiber length
    CrnDomain crn_domain = CrnDomain::Counts;
    std::uint64_t rng_seed = 1;

    void validate() const;
    /// (V_g / (4 dz dnu))^(1/2)
    double sigma_crn(double fiber_length_m) const;
};

struct CleanProfile {
    Profile profile;
    CoefficientVector beta;   // dictionary units
};

/// beta_1 = -attenuation * spacing / sigma (dB per sample in dictionary units),
/// beta at column position+1 = -loss, y = A beta.
CleanProfile synth_clean_profile(const FiberSpec& spec, const DictionaryShape& shape);

struct NoiseDiagnostics {
    std::size_t clamped_samples = 0;   // zero counts lifted to one / power floored
};

/// C_i = c0 10^(y_i/10), k_i ~ Poisson(C_i), out = 10 log10(max(k_i, 1) / c0).
Profile add_counting_noise(const Profile& y_db, const NoiseSpec& noise, std::mt19937_64& rng,
                           NoiseDiagnostics* diagnostics = nullptr);

/// Adds CRN in the configured domain. sigma_crn = 0 leaves the input untouched.
Profile add_crn(const Profile& y_db, const NoiseSpec& noise, std::mt19937_64& rng,
                NoiseDiagnostics* diagnostics = nullptr);

/// Counting noise then CRN. In the Counts domain both terms act on the same
/// draw: k_i + sigma_crn g_i, floored at one count.
Profile add_measurement_noise(const Profile& y_db, const NoiseSpec& noise, std::mt19937_64& rng,
                              NoiseDiagnostics* diagnostics = nullptr);

struct TestbenchSpec {
    std::vector<std::size_t> lengths{5000, 10000, 15000};
    std::size_t profiles_per_length = 50;
    std::size_t faults_per_profile = 5;
    double min_loss_db = 0.5;
    double max_loss_db = 5.0;
    std::size_t min_separation = 2;
    double sample_spacing_m = 1.0;
    double attenuation_db_per_km = 0.2;
    double sigma = DictionaryShape::kDefaultSigma;
    NoiseSpec noise;
    std::uint64_t seed = 1;

    void validate() const;
    std::size_t total_profiles() const { return lengths.size() * profiles_per_length; }

    /// Lengths 5000..15000 in steps of 1000, 1000 profiles each.
    static TestbenchSpec full_scale();
    /// Lengths {5000, 10000, 15000}, 50 profiles each.
    static TestbenchSpec desk_scale();
};

struct TestbenchCase {
    std::size_t length_index = 0;
    std::size_t replicate = 0;
    FiberSpec fiber;
    Profile noisy;
    CoefficientVector beta_true;   // dictionary units
    NoiseDiagnostics diagnostics;
};

/// Generator seeded from (seed, length, replicate) so any case can be rebuilt
/// on its own.
std::mt19937_64 case_rng(std::uint64_t seed, std::size_t length, std::size_t replicate);

/// Builds case (length_index, replicate) of the testbench.
TestbenchCase make_testbench_case(const TestbenchSpec& spec, std::size_t length_index, std::size_t replicate);

/// Calls `sink` for every case in length-major order.
void random_testbench(const TestbenchSpec& spec, const std::function<void(TestbenchCase&&)>& sink);

/// Uniform positions in 2..n without replacement, pairwise at least
/// `min_separation` apart, ascending. Throws if the constraint is infeasible.
std::vector<std::size_t> draw_positions(std::size_t n_samples, std::size_t count, std::size_t min_separation,
                                        std::mt19937_64& rng);

}  // namespace lbotdr
