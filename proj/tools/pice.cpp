#include "pice/cli.hpp"

int main(int argc, char** argv) { return pice::cli::run(argc, argv); }
