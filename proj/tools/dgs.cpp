#include "dgs/cli.hpp"

int main(int argc, char** argv) { return dgs::cli::run(argc, argv); }
