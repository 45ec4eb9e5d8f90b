#include "sphertap/cli.hpp"

int main(int argc, char** argv) { return sphertap::cli::main_entry(argc, argv); }
