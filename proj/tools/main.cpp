#include "stablestein/cli.hpp"

int main(int argc, char** argv) { return stablestein::cli::run(argc, argv); }
