#pragma once

#include "doctest.h"
#include "omega_limit/error.hpp"

// Kind of the omega_limit::Error thrown by fn; fails the test when nothing is thrown.
template <class Fn>
omega_limit::ErrorKind error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const omega_limit::Error& e) {
    return e.kind();
  }
  FAIL("expected omega_limit::Error");
  return omega_limit::ErrorKind::io;
}
