#include "roughsk/cli.hpp"

int main(int argc, char** argv) { return roughsk::cli_main(argc, argv); }
