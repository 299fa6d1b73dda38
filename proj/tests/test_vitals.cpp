#include <catch2/catch_amalgamated.hpp>
#include "vitalwave/vitalwave.hpp"
