#include "cryptoscope/cli.hpp"

int main(int argc, char** argv) { return cryptoscope::cli::run(argc, argv); }
