#include "banksim/cli.hpp"

int main(int argc, char** argv) { return banksim::run_cli(argc, argv); }
