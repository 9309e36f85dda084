#include <doctest.h>

#include "cmrp/nn.hpp"

TEST_CASE("placeholder") { CHECK(true); }
