#include "esncrypt/cli.hpp"

int main(int argc, char** argv) { return esncrypt::run_cli(argc, argv); }
