#include <doctest.h>

#include "cmrp/train.hpp"

TEST_CASE("placeholder") { CHECK(true); }
