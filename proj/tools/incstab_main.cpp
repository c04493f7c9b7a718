#include "incstab/cli.hpp"

int main(int argc, char** argv) { return incstab::CliMain(argc, argv); }
