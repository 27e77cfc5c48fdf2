#include "mfmfe/cli.hpp"

int main(int argc, char** argv) { return mfmfe::run_cli(argc, argv); }
