#include "vitalwave/vitalwave.hpp"
int main() { return 0; }
