#include "cmix/cli.hpp"

int main(int argc, char** argv) { return cmix::cli::main(argc, argv); }
