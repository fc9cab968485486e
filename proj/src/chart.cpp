#include "qgrav/chart.hpp"

#include <set>

#include "qgrav/error.hpp"

namespace qgrav {

Chart::Chart(std::vector<std::string> coords, std::vector<int> signature,
             std::optional<std::size_t> time_index, Expr light_speed, double light_speed_value)
    : coords_(std::move(coords)),
      signature_(std::move(signature)),
      time_index_(time_index),
      light_speed_(std::move(light_speed)),
      light_speed_value_(light_speed_value) {
    if (coords_.empty() || coords_.size() > 4)
        throw SpecError("chart: dimension must be between 1 and 4");
    if (signature_.size() != coords_.size())
        throw SpecError("chart: signature length must equal coordinate count");
    std::set<std::string> seen(coords_.begin(), coords_.end());
    if (seen.size() != coords_.size())
        throw SpecError("chart: coordinates must be pairwise distinct");
    for (int s : signature_)
        if (s != 1 && s != -1) throw SpecError("chart: signature entries must be +1 or -1");
    if (time_index_ && *time_index_ >= coords_.size())
        throw SpecError("chart: time index out of range");
}

Chart Chart::polar() {
    return Chart({"r", "theta", "phi", "t"}, {1, 1, 1, -1}, 3, symbol("c"), 1.0);
}

Chart Chart::polar_c1() {
    return Chart({"r", "theta", "phi", "t"}, {1, 1, 1, -1}, 3, integer(1), 1.0);
}

Chart Chart::two_sphere() {
    return Chart({"theta", "phi"}, {1, 1}, std::nullopt, integer(1), 1.0);
}

Chart Chart::spatial3() {
    return Chart({"r", "theta", "phi"}, {1, 1, 1}, std::nullopt, integer(1), 1.0);
}

bool Chart::operator==(const Chart& o) const {
    return coords_ == o.coords_ && signature_ == o.signature_ && time_index_ == o.time_index_ &&
           light_speed_ == o.light_speed_;
}

}  // namespace qgrav
