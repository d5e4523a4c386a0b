#include "missmass/cli.hpp"

int main(int argc, char** argv) { return missmass::cli::run_cli(argc, argv); }
