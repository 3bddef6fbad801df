#include "cli/cli.hpp"

int main(int argc, char** argv) { return covar::cli::run(argc, argv); }
