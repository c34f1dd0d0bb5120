#include "isocurve/cli.hpp"

int main(int argc, char** argv) { return isocurve::run_cli(argc, argv); }
