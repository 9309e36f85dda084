#include "cmrp/counting.hpp"

#include <stdexcept>

namespace cmrp {

BigInt count_solutions(int n_prime, int m) {
    if (n_prime < 0) throw std::invalid_argument("n_prime must be >= 0");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    // (n' + m - 1)! / (m - 1)! = m * (m + 1) * ... * (n' + m - 1)
    BigInt count = 1;
    for (int factor = m; factor <= n_prime + m - 1; ++factor) count *= factor;
    return count;
}

}  // namespace cmrp
