#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace cmrp {

using BigInt = boost::multiprecision::cpp_int;

// Number of distinct mission plans for n_prime sub-tasks and m distinguishable
// agents, empty routes allowed: (n' + m - 1)! / (m - 1)!.
BigInt count_solutions(int n_prime, int m);

}  // namespace cmrp
