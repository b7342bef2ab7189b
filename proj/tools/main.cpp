#include "cli/run.hpp"

int main(int argc, char** argv) { return omega_cli::run(argc, argv); }
