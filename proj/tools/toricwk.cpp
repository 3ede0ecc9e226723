#include "toricwk/cli.hpp"

int main(int argc, char** argv) { return toricwk::cli::main(argc, argv); }
