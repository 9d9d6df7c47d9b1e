#include "ssnet/cli.hpp"

int main(int argc, char** argv) { return ssnet::cli::main_entry(argc, argv); }
