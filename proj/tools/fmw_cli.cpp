#include "cli.hpp"

int main(int argc, char** argv) { return fmw::cli::run_command(argc, argv); }
