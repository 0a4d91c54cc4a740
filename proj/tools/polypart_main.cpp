#include "polypart/cli.hpp"

int main(int argc, char** argv) { return polypart::run(argc, argv); }
