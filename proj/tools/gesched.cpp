#include "gesched/cli.hpp"

int main(int argc, char** argv) { return gesched::run_cli(argc, argv); }
