#include "redreg/cli.hpp"

int main(int argc, char** argv) { return redreg::cli_main(argc, argv); }
