#include "ide/cli.hpp"

int main(int argc, char** argv) { return ide::dispatch(argc, argv); }
