"""This module contains the main code for the ks2lab package."""
