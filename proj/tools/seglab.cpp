#include "seglab/cli.hpp"

int main(int argc, char** argv) { return seglab::run_cli(argc, argv); }
