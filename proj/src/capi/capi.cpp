#include "twoconvex/twoconvex.h"
