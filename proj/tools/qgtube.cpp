#include "qgtube/cli.hpp"

int main(int argc, char** argv) { return qgtube::run(argc, argv); }
