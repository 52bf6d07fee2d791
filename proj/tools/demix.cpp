#include "demix/cli.hpp"

int main(int argc, char** argv)
{
  return demix::run(argc, argv);
}
