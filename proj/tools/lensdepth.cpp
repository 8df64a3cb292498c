#include "lensdepth/cli.hpp"

int main(int argc, char** argv) { return lensdepth::cli::run(argc, argv); }
