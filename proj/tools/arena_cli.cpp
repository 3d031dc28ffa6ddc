#include "arena/cli.hpp"

int main(int argc, char** argv) { return arena::cli_main(argc, argv); }
