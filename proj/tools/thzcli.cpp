#include "thzalloc/cli.hpp"

int main(int argc, char** argv) { return thzalloc::cli_main(argc, argv); }
