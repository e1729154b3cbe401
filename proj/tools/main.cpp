#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "cthp/adam.hpp"
#include "cthp/pinn.hpp"
#include "cthp/trajectory_io.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return cthp::tool::run(args);
  } catch (const cthp::tool::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cthp::tool::kExitConfig;
  } catch (const cthp::CsvFormatError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cthp::tool::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cthp::tool::kExitConfig;
  } catch (const cthp::tool::DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return cthp::tool::kExitDivergence;
  } catch (const cthp::NonFiniteLoss& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return cthp::tool::kExitNumeric;
  } catch (const cthp::NonFiniteGradient& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return cthp::tool::kExitNumeric;
  } catch (const cthp::tool::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return cthp::tool::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cthp::tool::kExitConfig;
  }
}
