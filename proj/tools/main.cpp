#include "siselab/cli.hpp"

int main(int argc, char** argv) { return siselab::cli::run(argc, argv); }
