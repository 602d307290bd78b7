#include "cli.hpp"

int main(int argc, char** argv) { return hdcov::cli::run(argc, argv); }
