#include "critsys/cli.hpp"

int main(int argc, char** argv) { return critsys::run_cli(argc, argv); }
