#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cmrp/scenario.hpp"

namespace cmrp {

enum class VertexRole : std::uint8_t { Depot, Start, SubTask, Pad };

// Asymmetric edge-cost matrix entry(i, j) = travel(i, j)/speed + t(j), with
// two structural constraints baked in: travel out of the depot is zero, and
// edges into any start vertex are +infinity (except from the depot). Forbidden
// edges use the IEEE +infinity sentinel; selection logic must mask them and
// never add them into a running total.
class CostMatrix {
public:
    CostMatrix(int size, std::vector<double> entries, std::vector<VertexRole> roles,
               std::vector<int> role_arg)
        : size_(size),
          entries_(std::move(entries)),
          roles_(std::move(roles)),
          role_arg_(std::move(role_arg)) {}

    int size() const { return size_; }

    double operator()(int from, int to) const { return entries_[from * size_ + to]; }

    VertexRole role(int vertex) const { return roles_[vertex]; }

    // Agent index for Start vertices, sub-task index for SubTask vertices.
    int role_arg(int vertex) const { return role_arg_[vertex]; }

    static constexpr double kForbidden = std::numeric_limits<double>::infinity();

private:
    int size_;
    std::vector<double> entries_;
    std::vector<VertexRole> roles_;
    std::vector<int> role_arg_;
};

CostMatrix build_cost_matrix(const Scenario& scenario);

}  // namespace cmrp
