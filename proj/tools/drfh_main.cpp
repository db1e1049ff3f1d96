#include "drfh/cli.hpp"

int main(int argc, char** argv) { return drfh::dispatch(argc, argv); }
