#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgrav/expr.hpp"

namespace qgrav {

// Ordered coordinate system with a diagonal signature and an optional time
// coordinate. The light-speed factor is carried either as the symbol c
// (default) or folded in as an exact numeric value.
class Chart {
public:
    Chart(std::vector<std::string> coords, std::vector<int> signature,
          std::optional<std::size_t> time_index, Expr light_speed, double light_speed_value);

    static Chart polar();       // (r, theta, phi, t), signature (+,+,+,-), symbolic c
    static Chart polar_c1();    // same with c = 1 exactly
    static Chart two_sphere();  // (theta, phi), Riemannian
    static Chart spatial3();    // (r, theta, phi), Riemannian

    std::size_t dim() const { return coords_.size(); }
    const std::vector<std::string>& coords() const { return coords_; }
    const std::string& coord(std::size_t i) const { return coords_[i]; }
    const std::vector<int>& signature() const { return signature_; }
    std::optional<std::size_t> time_index() const { return time_index_; }
    bool is_time(std::size_t i) const { return time_index_ && *time_index_ == i; }

    // c as an expression (symbol or exact constant) and its numeric value
    const Expr& light_speed() const { return light_speed_; }
    double light_speed_value() const { return light_speed_value_; }

    bool operator==(const Chart& o) const;

private:
    std::vector<std::string> coords_;
    std::vector<int> signature_;
    std::optional<std::size_t> time_index_;
    Expr light_speed_;
    double light_speed_value_;
};

}  // namespace qgrav
