#include "hh/cli.hpp"

int main(int argc, char** argv) { return hh::cli::run(argc, argv); }
