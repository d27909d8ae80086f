#include "eqbandit/harness/cli.hpp"

int main(int argc, char** argv) { return eqbandit::cli_main(argc, argv); }
