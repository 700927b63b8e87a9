# Utils package for the mixed precision thin SVD library
