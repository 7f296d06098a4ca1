#include "harris/cli.hpp"

int main(int argc, char** argv) { return harris::cli::main(argc, argv); }
