#include "cli.hpp"

int main(int argc, char** argv) { return sheetlab::cli::run(argc, argv); }
