#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lbotdr {

// Dense coefficient vector. Index 0 holds the slope coefficient, index j >= 1
// the step that starts at sample j (1-based samples), i.e. coefficient j+1 in
// the 1-based column numbering of the dictionary.
using CoefficientVector = std::vector<double>;

// Equidistantly sampled trace in dB.
struct Profile {
    std::vector<double> samples;
    double sample_spacing_m = 1.0;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
};

struct Event {
    std::size_t position_index = 0;  // 1-based sample where the loss first shows
    double position_m = 0.0;
    double loss_db = 0.0;            // positive for a loss
};

struct EventList {
    std::vector<Event> events;
    double slope_db_per_sample = 0.0;
};

// Precondition violations on public entry points.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace lbotdr
