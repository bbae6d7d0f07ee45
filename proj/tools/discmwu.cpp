#include "commands.hpp"

int main(int argc, char** argv) { return discmwu::cli::main(argc, argv); }
