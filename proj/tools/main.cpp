#include "walltopo/cli.hpp"

int main(int argc, char** argv) { return walltopo::cli_main(argc, argv); }
