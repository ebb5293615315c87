#include "rotfield/cli.hpp"

int main(int argc, char** argv) { return rotfield::cli::main_entry(argc, argv); }
