#include "recur/commands.hpp"

int main(int argc, char** argv) { return recur::run_cli(argc, argv); }
