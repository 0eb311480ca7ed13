#include "nanobus/cli/runner.hpp"

int main(int argc, char** argv) { return nanobus::cli::run_main(argc, argv); }
