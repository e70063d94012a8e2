#include "experiments.hpp"

int main(int argc, char** argv) { return sbm::cli::run_cli(argc, argv); }
