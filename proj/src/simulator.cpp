#include "lbotdr/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lbotdr {

namespace {

constexpr double kPowerFloor = 1e-12;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace

void FiberSpec::validate() const {
    if (n_samples < 2) {
        throw InvalidArgument("fiber needs at least 2 samples");
    }
    if (!(sample_spacing_m > 0.0) || !(attenuation_db_per_km >= 0.0)) {
        throw InvalidArgument("sample spacing must be positive and attenuation non-negative");
    }
    for (std::size_t k = 0; k < events.size(); ++k) {
        const FaultEvent& e = events[k];
        if (e.position < 2 || e.position > n_samples) {
            throw InvalidArgument("event position " + std::to_string(e.position) + " outside 2.." +
                                  std::to_string(n_samples));
        }
        if (!(e.loss_db > 0.0)) {
            throw InvalidArgument("event losses must be positive");
        }
        if (k > 0 && e.position <= events[k - 1].position) {
            throw InvalidArgument("event positions must be strictly ascending");
        }
    }
}

void NoiseSpec::validate() const {
    if (!(c0 > 0.0) || !(delta_nu_hz > 0.0) || !(v_g_m_s > 0.0) || delta_z_m < 0.0) {
        throw InvalidArgument("noise parameters must be positive");
    }
}

double NoiseSpec::sigma_crn(double fiber_length_m) const {
    const double dz = delta_z_m > 0.0 ? delta_z_m : fiber_length_m;
    if (!(dz > 0.0)) {
        throw InvalidArgument("CRN length scale must be positive");
    }
    return std::sqrt(v_g_m_s / (4.0 * dz * delta_nu_hz));
}

CleanProfile synth_clean_profile(const FiberSpec& spec, const DictionaryShape& shape) {
    spec.validate();
    if (shape.rows() != spec.n_samples) {
        throw InvalidArgument("dictionary shape does not match the fiber sample count");
    }
    CleanProfile out;
    out.beta.assign(shape.columns(), 0.0);
    const double db_per_sample = spec.attenuation_db_per_km * spec.sample_spacing_m / 1000.0;
    out.beta[0] = -db_per_sample / shape.sigma();
    for (const FaultEvent& e : spec.events) {
        out.beta[e.position] = -e.loss_db;
    }
    out.profile.samples = apply_dictionary(shape, out.beta);
    out.profile.sample_spacing_m = spec.sample_spacing_m;
    return out;
}

Profile add_counting_noise(const Profile& y_db, const NoiseSpec& noise, std::mt19937_64& rng,
                           NoiseDiagnostics* diagnostics) {
    noise.validate();
    Profile out = y_db;
    for (double& sample : out.samples) {
        const double expected = noise.c0 * db_to_linear(sample);
        std::poisson_distribution<long long> counts(expected);
        long long k = counts(rng);
        if (k < 1) {
            k = 1;
            if (diagnostics != nullptr) {
                ++diagnostics->clamped_samples;
            }
        }
        sample = linear_to_db(static_cast<double>(k) / noise.c0);
    }
    return out;
}

Profile add_crn(const Profile& y_db, const NoiseSpec& noise, std::mt19937_64& rng, NoiseDiagnostics* diagnostics) {
    noise.validate();
    const double fiber_length = static_cast<double>(y_db.size()) * y_db.sample_spacing_m;
    const double sigma = noise.sigma_crn(fiber_length);
    Profile out = y_db;
    if (sigma == 0.0) {
        return out;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& sample : out.samples) {
        const double g = gauss(rng);
        switch (noise.crn_domain) {
            case CrnDomain::Decibel:
                sample += sigma * g;
                break;
            case CrnDomain::LinearPower: {
                double lin = db_to_linear(sample) * (1.0 + sigma * g);
                if (lin < kPowerFloor) {
                    lin = kPowerFloor;
                    if (diagnostics != nullptr) {
                        ++diagnostics->clamped_samples;
                    }
                }
                sample = linear_to_db(lin);
                break;
            }
            case CrnDomain::Counts: {
                double counts = noise.c0 * db_to_linear(sample) + sigma * g;
                if (counts < 1.0) {
                    counts = 1.0;
                    if (diagnostics != nullptr) {
                        ++diagnostics->clamped_samples;
                    }
                }
                sample = linear_to_db(counts / noise.c0);
                break;
            }
        }
    }
    return out;
}

Profile add_measurement_noise(const Profile& y_db, const NoiseSpec& noise, std::mt19937_64& rng,
                              NoiseDiagnostics* diagnostics) {
    return add_crn(add_counting_noise(y_db, noise, rng, diagnostics), noise, rng, diagnostics);
}

void TestbenchSpec::validate() const {
    if (lengths.empty() || profiles_per_length == 0) {
        throw InvalidArgument("testbench needs at least one length and one profile per length");
    }
    if (!(min_loss_db > 0.0) || !(max_loss_db >= min_loss_db)) {
        throw InvalidArgument("fault magnitude range must satisfy 0 < low <= high");
    }
    if (min_separation == 0) {
        throw InvalidArgument("minimum separation must be at least 1");
    }
    for (const std::size_t n : lengths) {
        if (n < 3) {
            throw InvalidArgument("testbench lengths must be at least 3 samples");
        }
        // positions live in 2..n; a greedy packing needs (count-1)*sep + 1 slots
        if (faults_per_profile > 0 && (faults_per_profile - 1) * min_separation + 1 > n - 1) {
            throw InvalidArgument("cannot place " + std::to_string(faults_per_profile) + " faults " +
                                  std::to_string(min_separation) + " samples apart in " + std::to_string(n) +
                                  " samples");
        }
    }
    noise.validate();
}

TestbenchSpec TestbenchSpec::full_scale() {
    TestbenchSpec spec;
    spec.lengths.clear();
    for (std::size_t n = 5000; n <= 15000; n += 1000) {
        spec.lengths.push_back(n);
    }
    spec.profiles_per_length = 1000;
    return spec;
}

TestbenchSpec TestbenchSpec::desk_scale() { return TestbenchSpec{}; }

std::mt19937_64 case_rng(std::uint64_t seed, std::size_t length, std::size_t replicate) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(length), static_cast<std::uint32_t>(replicate)};
    return std::mt19937_64(seq);
}

std::vector<std::size_t> draw_positions(std::size_t n_samples, std::size_t count, std::size_t min_separation,
                                        std::mt19937_64& rng) {
    if (count == 0) {
        return {};
    }
    if (n_samples < 2 || min_separation == 0 || (count - 1) * min_separation + 1 > n_samples - 1) {
        throw InvalidArgument("fault placement constraints are infeasible");
    }
    // Rejection sampling without replacement; the testbench regime is sparse
    // enough that this terminates quickly, but cap it anyway.
    std::uniform_int_distribution<std::size_t> pick(2, n_samples);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<std::size_t> out;
        out.reserve(count);
        while (out.size() < count) {
            const std::size_t candidate = pick(rng);
            const bool clash = std::any_of(out.begin(), out.end(), [&](std::size_t q) {
                return (candidate > q ? candidate - q : q - candidate) < min_separation;
            });
            if (clash) {
                if (out.size() * (2 * min_separation - 1) >= n_samples - 1) {
                    break;   // crowded; restart the draw
                }
                continue;
            }
            out.push_back(candidate);
        }
        if (out.size() == count) {
            std::sort(out.begin(), out.end());
            return out;
        }
    }
    throw InvalidArgument("could not place faults under the separation constraint");
}

TestbenchCase make_testbench_case(const TestbenchSpec& spec, std::size_t length_index, std::size_t replicate) {
    const std::size_t n = spec.lengths.at(length_index);
    std::mt19937_64 rng = case_rng(spec.seed, n, replicate);

    TestbenchCase out;
    out.length_index = length_index;
    out.replicate = replicate;
    out.fiber.n_samples = n;
    out.fiber.sample_spacing_m = spec.sample_spacing_m;
    out.fiber.attenuation_db_per_km = spec.attenuation_db_per_km;

    const std::vector<std::size_t> positions = draw_positions(n, spec.faults_per_profile, spec.min_separation, rng);
    std::uniform_real_distribution<double> loss(spec.min_loss_db, spec.max_loss_db);
    for (const std::size_t pos : positions) {
        out.fiber.events.push_back(FaultEvent{pos, loss(rng)});
    }

    const DictionaryShape shape = DictionaryShape::for_samples(n, spec.sigma);
    CleanProfile clean = synth_clean_profile(out.fiber, shape);
    out.beta_true = std::move(clean.beta);
    out.noisy = add_measurement_noise(clean.profile, spec.noise, rng, &out.diagnostics);
    return out;
}

void random_testbench(const TestbenchSpec& spec, const std::function<void(TestbenchCase&&)>& sink) {
    spec.validate();
    for (std::size_t li = 0; li < spec.lengths.size(); ++li) {
        for (std::size_t r = 0; r < spec.profiles_per_length; ++r) {
            sink(make_testbench_case(spec, li, r));
        }
    }
}

}  // namespace lbotdr
