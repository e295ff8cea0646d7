#include "scoreforge/cli.hpp"

int main(int argc, char** argv) { return scoreforge::cli_main(argc, argv); }
