#include "cwhopf/cli.hpp"

int main(int argc, char** argv) { return cwhopf::cli::run(argc, argv); }
